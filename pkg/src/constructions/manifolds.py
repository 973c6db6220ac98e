"""
Stable and unstable manifolds of the saddle at the origin of
F(z, w) = (f(z) + aw, az), and orbit shooting past the saddle.

The manifolds are parameterized by power series φ with F(φ(ζ)) = φ(λζ),
solved order by order; points beyond the validated radius are reached by
pushing series points through F (unstable) or F⁻¹ (stable).
"""
from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as npoly

from src.core.expr import Expr, Poly
from src.core.henon import HenonMap, eigenvalues
from src.utils.error_handler import ResidualTooLarge, ResonanceDetected, ShootFailed

logger = logging.getLogger(__name__)

Which = Literal["stable", "unstable"]


@dataclass(frozen=True)
class SaddleModel:
    """Linear part dF(0) = [[b, a], [a, 0]] of the family."""
    a: float = 0.5
    b: float = 1.0

    @property
    def lambda_s(self) -> float:
        return (self.b - math.sqrt(self.b ** 2 + 4 * self.a ** 2)) / 2

    @property
    def lambda_u(self) -> float:
        return (self.b + math.sqrt(self.b ** 2 + 4 * self.a ** 2)) / 2

    def differential(self) -> np.ndarray:
        return np.array([[self.b, self.a], [self.a, 0.0]], dtype=complex)

    def eigvec(self, lam: complex) -> np.ndarray:
        v = np.array([lam, self.a], dtype=complex)
        return v / np.linalg.norm(v)

    @property
    def eigvec_s(self) -> np.ndarray:
        return self.eigvec(self.lambda_s)

    @property
    def eigvec_u(self) -> np.ndarray:
        return self.eigvec(self.lambda_u)

    def eigvec_residual(self) -> float:
        D = self.differential()
        return max(float(np.linalg.norm((D - lam * np.eye(2)) @ self.eigvec(lam)))
                   for lam in (self.lambda_s, self.lambda_u))

    def linear_map(self) -> HenonMap:
        return HenonMap.alternative(Poly((0j, self.b)), self.a)


@dataclass(frozen=True, eq=False)
class ManifoldSeries:
    which: Which
    coefficients: np.ndarray  # (order+1, 2); row 0 is zero, row 1 the eigenvector
    order: int
    radius_validated: float
    multiplier: complex

    def __call__(self, zeta: np.ndarray) -> np.ndarray:
        """φ(ζ) as a (2, ...) array; only meaningful for |ζ| ≤ radius_validated."""
        zeta = np.asarray(zeta, dtype=complex)
        return np.stack([npoly.polyval(zeta, self.coefficients[:, 0]),
                         npoly.polyval(zeta, self.coefficients[:, 1])])

    def to_dict(self) -> dict:
        return {"which": self.which, "order": self.order, "radius_validated": self.radius_validated,
                "multiplier": [self.multiplier.real, self.multiplier.imag],
                "coefficients": [[[c.real, c.imag] for c in row] for row in self.coefficients]}


@dataclass(frozen=True, eq=False)
class ManifoldTarget:
    """A point φ(ζ) on a manifold with its tangent φ'(ζ)."""
    which: Which
    zeta: complex
    point: np.ndarray
    tangent: np.ndarray


@dataclass(frozen=True, eq=False)
class ShotOrbit:
    points: np.ndarray  # (M+1, 2)
    offset: complex
    direction: np.ndarray
    min_norm: float
    end_error: float
    bisection_steps: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.points) - 1


def taylor_coefficients(f: Expr, order: int, radius: float = 1.0,
                        nodes: Optional[int] = None) -> np.ndarray:
    """Taylor coefficients of f at 0 up to ``order`` by the trapezoidal Cauchy integral."""
    nodes = nodes or max(256, 4 * (order + 1))
    theta = 2 * np.pi * np.arange(nodes) / nodes
    values = np.asarray(f(radius * np.exp(1j * theta)), dtype=complex)
    coeffs = np.fft.fft(values) / nodes
    return coeffs[:order + 1] / radius ** np.arange(order + 1)


def _composition_term(taylor: np.ndarray, x: np.ndarray, k: int) -> complex:
    """Coefficient of ζ^k in Σ_{j≥2} taylor[j]·x(ζ)^j, with x known below order k."""
    base = x[:k + 1].copy()
    base[k] = 0
    power = base.copy()
    total = 0j
    for j in range(2, k + 1):
        power = np.convolve(power, base)[:k + 1]
        total += taylor[j] * power[k]
    return total


def series_residual(m: HenonMap, series: ManifoldSeries, radius: float, samples: int = 64) -> float:
    """max ‖F(φ(ζ)) − φ(λζ)‖ on two circles |ζ| = radius and radius/2."""
    theta = 2 * np.pi * np.arange(samples) / samples
    zeta = np.concatenate([radius * np.exp(1j * theta), 0.5 * radius * np.exp(1j * theta)])
    diff = m.apply(series(zeta)) - series(series.multiplier * zeta)
    return float(np.max(np.linalg.norm(diff, axis=0)))


def linearize(m: HenonMap, which: Which = "stable", order: int = 30,
              tol: float = 1e-8) -> ManifoldSeries:
    """Power series of W^s or W^u at the saddle (0, 0) of an alternative-form map."""
    if m.form != "alternative":
        raise ValueError("linearize works on alternative-form maps")
    if abs(complex(m.f(0j))) > 1e-10:
        raise ValueError("the origin is not a fixed point")
    D = m.differential(np.zeros(2, dtype=complex))
    lam_s, lam_u = eigenvalues(D)
    if not abs(lam_s) < 1 < abs(lam_u):
        raise ValueError("the origin is not a saddle")
    lam = lam_s if which == "stable" else lam_u
    a = D[0, 1]
    v = np.array([lam, a], dtype=complex)
    v /= np.linalg.norm(v)

    taylor = taylor_coefficients(m.f, order)
    coeffs = np.zeros((order + 1, 2), dtype=complex)
    coeffs[1] = v
    for k in range(2, order + 1):
        rhs = np.array([-_composition_term(taylor, coeffs[:, 0], k), 0j])
        system = D - lam ** k * np.eye(2)
        det = system[0, 0] * system[1, 1] - system[0, 1] * system[1, 0]
        if abs(det) < 1e-12 * max(1.0, abs(lam) ** (2 * k)):
            raise ResonanceDetected("λ^k is an eigenvalue of dF(0)", order=k, which=which)
        coeffs[k] = np.linalg.solve(system, rhs)

    series = ManifoldSeries(which, coeffs, order, 1.0, complex(lam))
    radius = 1.0
    while radius >= 1e-3:
        if series_residual(m, ManifoldSeries(which, coeffs, order, radius, complex(lam)), radius) < tol:
            logger.debug("manifold series", extra={"which": which, "radius": radius})
            return ManifoldSeries(which, coeffs, order, radius, complex(lam))
        radius *= 0.9
    raise ResidualTooLarge("no radius ≥ 1e-3 validates the series", which=which, order=order,
                           residual=series_residual(m, series, 1e-3))


def manifold_point(m: HenonMap, series: ManifoldSeries, zeta: np.ndarray) -> np.ndarray:
    """φ(ζ) for any ζ, pushing validated series points through F or F⁻¹."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    lam = abs(series.multiplier)
    ratio = np.abs(zeta) / series.radius_validated
    with np.errstate(divide="ignore"):
        steps = np.where(ratio > 1, np.ceil(np.log(np.maximum(ratio, 1)) / abs(math.log(lam))), 0)
    steps = steps.astype(int)
    inner = zeta * series.multiplier ** steps if series.which == "stable" \
        else zeta / series.multiplier ** steps
    points = series(inner)
    step = m.apply_inverse if series.which == "stable" else m.apply
    for s in range(int(steps.max(initial=0))):
        mask = steps > s
        points[:, mask] = step(points[:, mask])
    return points


def manifold_tangent(m: HenonMap, series: ManifoldSeries, zeta: complex, h: float = 1e-6) -> np.ndarray:
    dz = h * max(1.0, abs(zeta))
    ahead = manifold_point(m, series, zeta + dz)[:, 0]
    behind = manifold_point(m, series, zeta - dz)[:, 0]
    return (ahead - behind) / (2 * dz)


def ray_distances(m: HenonMap, series: ManifoldSeries, modulus: float, coordinate: int,
                  rays: int = 256, bisection: int = 60) -> Tuple[np.ndarray, np.ndarray]:
    """Per ray, the smallest |ζ| with |φ(ζ)[coordinate]| = modulus (NaN if never reached)."""
    angles = 2 * np.pi * np.arange(rays) / rays
    direction = np.exp(1j * angles)

    def level(t: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.abs(manifold_point(m, series, t * direction)[coordinate]) - modulus

    lo = np.zeros(rays)
    hi = np.full(rays, series.radius_validated / 8)
    found = np.zeros(rays, dtype=bool)
    for _ in range(200):
        above = level(hi) >= 0
        found |= above
        if found.all():
            break
        lo = np.where(found, lo, hi)
        hi = np.where(found, hi, hi * 1.5)
    for _ in range(bisection):
        mid = (lo + hi) / 2
        above = level(mid) >= 0
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return angles, np.where(found, hi, np.nan)


def manifold_target(m: HenonMap, series: ManifoldSeries, modulus: float, coordinate: int,
                    avoid: Optional[complex] = None, rays: int = 256) -> ManifoldTarget:
    """A point φ(ζ) with |φ(ζ)[coordinate]| = modulus and |ζ| minimal over the rays.

    Rays tied at the minimal |ζ| are broken by keeping the backward first
    coordinates of the point farthest from ``avoid`` (unstable side) or by
    angle order (stable side).
    """
    angles, t = ray_distances(m, series, modulus, coordinate, rays)
    if np.all(np.isnan(t)):
        raise ResidualTooLarge("manifold never reaches the requested modulus", modulus=modulus)
    t_min = np.nanmin(t)
    candidates = np.flatnonzero(t <= t_min * (1 + 1e-9))
    choice = int(candidates[0])
    if avoid is not None and series.which == "unstable":
        best = -1.0
        for idx in candidates:
            gap = _backward_gap(m, series, t[idx] * np.exp(1j * angles[idx]), avoid)
            if gap > best:
                best, choice = gap, int(idx)
    zeta = complex(t[choice] * np.exp(1j * angles[choice]))
    if avoid is not None and series.which == "unstable" and \
            _backward_gap(m, series, zeta, avoid) < 1e-4 * max(1.0, abs(avoid)):
        zeta *= 1 + 1e-4
    point = manifold_point(m, series, zeta)[:, 0]
    return ManifoldTarget(series.which, zeta, point, manifold_tangent(m, series, zeta))


def _backward_gap(m: HenonMap, series: ManifoldSeries, zeta: complex, avoid: complex,
                  depth: int = 60) -> float:
    zetas = zeta / series.multiplier ** np.arange(depth)
    firsts = manifold_point(m, series, zetas)[0]
    return float(np.min(np.abs(firsts - avoid)))


def _unstable_component(m: HenonMap, d: np.ndarray) -> Tuple[complex, complex]:
    D = m.differential(np.zeros(2, dtype=complex))
    lam_s, lam_u = eigenvalues(D)
    a = D[0, 1]
    basis = np.column_stack([[lam_s, a], [lam_u, a]]).astype(complex)
    basis /= np.linalg.norm(basis, axis=0)
    coords = np.linalg.solve(basis, d)
    return complex(coords[1]), complex(lam_u)


def unstable_coordinate(m: HenonMap, p: np.ndarray) -> complex:
    """Coordinate of p along the unit unstable eigenvector of dF(0)."""
    return _unstable_component(m, np.asarray(p, dtype=complex))[0]


def _orbit_end(m: HenonMap, p: np.ndarray, steps: int) -> np.ndarray:
    q = p
    for _ in range(steps):
        q = m.apply(q)
    return q


def lambda_shoot(m: HenonMap, stable: ManifoldTarget, unstable: ManifoldTarget,
                 ball_radius: float, max_iterates: int = 200, bisection_steps: int = 200,
                 end_tol: float = 1e-3) -> ShotOrbit:
    """An orbit Q_0..Q_M from the transversal through the stable target, past the
    saddle within ``ball_radius``, ending at the unstable target.

    For each length M (increasing) the real offset along the phase-aligned
    transversal is bracketed and bisected on whether Q_M overshoots the target
    along W^u, then refined as a complex offset by Gauss-Newton. The first M
    meeting all conditions wins.
    """
    if not ball_radius > 0:
        raise ValueError("ball_radius must be positive")
    tangent = stable.tangent / np.linalg.norm(stable.tangent)
    normal = np.array([-np.conj(tangent[1]), np.conj(tangent[0])])
    beta_d, lam_u = _unstable_component(m, normal)
    eta = unstable_coordinate(m, unstable.point)
    target = unstable.point
    target_norm = float(np.linalg.norm(target))
    p_s = stable.point
    last_reason = "no length tried"

    for M in range(1, max_iterates + 1):
        phase = eta / (beta_d * lam_u ** M)
        direction = normal * phase / abs(phase)
        s_lin = abs(phase)

        def overshoots(s: float) -> bool:
            end = _orbit_end(m, p_s + s * direction, M)
            return not np.all(np.isfinite(end)) or float(np.linalg.norm(end)) > target_norm

        lo, hi = 0.0, 4.0 * s_lin
        if overshoots(lo) or not overshoots(hi):
            last_reason = "no bracket"
            continue
        used = 0
        while used < bisection_steps and hi - lo > 1e-15 * max(hi, 1e-300):
            mid = (lo + hi) / 2
            if overshoots(mid):
                hi = mid
            else:
                lo = mid
            used += 1
        if used >= bisection_steps:
            last_reason = "bisection exhausted"
            continue

        t = (lo + hi) / 2 * phase / abs(phase)
        t = _gauss_newton(m, p_s, normal, target, t, M)
        orbit = m.iterate(p_s + t * normal, M)
        if orbit.overflow:
            last_reason = "overflow"
            continue
        norms = np.linalg.norm(orbit.points, axis=1)
        end_error = float(np.linalg.norm(orbit.points[-1] - target))
        if norms.min() < ball_radius and end_error < end_tol:
            logger.info("lambda shoot", extra={"length": M, "min_norm": float(norms.min()),
                                               "end_error": end_error})
            return ShotOrbit(orbit.points, t, normal, float(norms.min()), end_error, used)
        last_reason = "ball or end condition not met"
    raise ShootFailed("no orbit length satisfied the shooting conditions",
                      ball_radius=ball_radius, max_iterates=max_iterates, reason=last_reason)


def _gauss_newton(m: HenonMap, p_s: np.ndarray, d: np.ndarray, target: np.ndarray,
                  t: complex, M: int, iterations: int = 50) -> complex:
    for _ in range(iterations):
        q0 = p_s + t * d
        q = q0
        jac = d.copy()
        for _ in range(M):
            jac = m.differential(q) @ jac
            q = m.apply(q)
        r = q - target
        denom = np.vdot(jac, jac)
        if not np.isfinite(denom) or denom == 0:
            break
        step = -np.vdot(jac, r) / denom
        t += step
        if abs(step) <= 1e-14 * max(1.0, abs(t)):
            break
    return complex(t)
