"""
Polynomial approximation on finite unions of disjoint closed disks with exact
interpolation of values and first derivatives.

The variable is u = z/R_scale with R_scale = max over disks of (|center| + radius).
Polynomials are built in a Newton basis on Leja points of the disk boundaries,
scaled by the capacity estimate of those points, so the basis stays well
conditioned on unions of very unequal disks. Least squares on boundary and
interior samples is solved through the constrained normal system, assembled
disk by disk; interpolation conditions are eliminated through a QR
factorization of the constraint matrix and the result gets one step of
iterative refinement.
Degrees double from the start degree up to the cap; the first degree whose
validated sup-norm error is at most epsilon and whose conditions residual is
below the limit wins. A degree whose system is singular or ill-conditioned is
skipped.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
import scipy.linalg

from config import settings
from src.core.expr import Expr, NewtonPoly
from src.utils.error_handler import DegreeCapExceeded, DisksOverlap, IllConditioned
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

Target = Union[complex, Expr]

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class DiskTarget:
    """Closed disk with a constant or entire-function target."""
    center: complex
    radius: float
    target: Target

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not isinstance(self.target, Expr):
            object.__setattr__(self, "target", complex(self.target))
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def is_constant(self) -> bool:
        return not isinstance(self.target, Expr)

    def values(self, z: np.ndarray) -> np.ndarray:
        if isinstance(self.target, Expr):
            return np.asarray(self.target(z), dtype=complex)
        return np.full(np.shape(z), self.target, dtype=complex)

    def contains(self, z: complex, slack: float = 1e-12) -> bool:
        return abs(complex(z) - self.center) <= self.radius * (1 + slack)

    def to_dict(self) -> dict:
        target = self.target.to_text() if isinstance(self.target, Expr) else \
            [self.target.real, self.target.imag]
        return {"center": [self.center.real, self.center.imag], "radius": self.radius,
                "target": target}


@dataclass(frozen=True)
class InterpCondition:
    point: complex
    value: complex
    deriv: Optional[complex] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", complex(self.point))
        object.__setattr__(self, "value", complex(self.value))
        if self.deriv is not None:
            object.__setattr__(self, "deriv", complex(self.deriv))


@dataclass(frozen=True)
class PolyApproximant:
    """A fitted polynomial.

    ``coefficients`` are monomial in z/scale and exported for reference;
    evaluation goes through the Newton form, which is the accurate one.
    """
    coefficients: Tuple[complex, ...]
    scale: float
    center: complex
    degree: int
    sup_error: float
    conditions_residual: float
    condition_estimate: float = 1.0
    newton_coefficients: Tuple[complex, ...] = ()
    nodes: Tuple[complex, ...] = ()
    capacity: float = 1.0

    def as_expr(self) -> NewtonPoly:
        return NewtonPoly(self.newton_coefficients, self.nodes, self.capacity, self.scale)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.as_expr()(z)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "scale": self.scale,
                "center": [self.center.real, self.center.imag], "sup_error": self.sup_error,
                "conditions_residual": self.conditions_residual,
                "condition_estimate": self.condition_estimate,
                "coefficients": [[c.real, c.imag] for c in self.coefficients],
                "newton": {"capacity": self.capacity,
                           "nodes": [[x.real, x.imag] for x in self.nodes],
                           "coefficients": [[c.real, c.imag] for c in self.newton_coefficients]}}

    @classmethod
    def from_expr(cls, p: NewtonPoly, sup_error: float, conditions_residual: float,
                  condition_estimate: float) -> "PolyApproximant":
        mono = p.monomial().coeffs
        return cls(mono, p.scale, 0j, p.degree, sup_error, conditions_residual,
                   condition_estimate, p.coeffs, p.nodes[:p.degree], p.capacity)


def check_disjoint(disks: Sequence[DiskTarget]) -> None:
    """Closed disks must be pairwise disjoint unless they share one function target."""
    for i, a in enumerate(disks):
        for j in range(i + 1, len(disks)):
            b = disks[j]
            if not a.is_constant and a.target == b.target:
                continue
            if abs(a.center - b.center) <= a.radius + b.radius:
                raise DisksOverlap("closed disks intersect", first=i, second=j,
                                   distance=abs(a.center - b.center),
                                   radii=a.radius + b.radius)


def merge_conditions(conditions: Sequence[InterpCondition],
                     tol: float = MERGE_TOL) -> List[InterpCondition]:
    """Drop conditions repeating an earlier one at a point within tol·max(1, |z|).

    Raises:
        IllConditioned: two such near-coincident conditions disagree
    """
    kept: List[InterpCondition] = []
    for cond in conditions:
        near = [i for i, k in enumerate(kept)
                if abs(cond.point - k.point) <= tol * max(1.0, abs(cond.point))]
        if not near:
            kept.append(cond)
            continue
        other = kept[near[0]]
        slack = 1e-10 * max(1.0, abs(other.value))
        if abs(cond.value - other.value) > slack:
            raise IllConditioned("conflicting interpolation conditions at nearly one point",
                                 point=cond.point, values=[other.value, cond.value])
        if cond.deriv is not None:
            if other.deriv is None:
                kept[near[0]] = InterpCondition(other.point, other.value, cond.deriv)
            elif abs(cond.deriv - other.deriv) > 1e-10 * max(1.0, abs(other.deriv)):
                raise IllConditioned("conflicting derivative conditions at nearly one point",
                                     point=cond.point, derivs=[other.deriv, cond.deriv])
    if len(kept) < len(conditions):
        logger.debug("interpolation conditions merged",
                     extra={"given": len(conditions), "kept": len(kept)})
    return kept


def boundary_points(disk: DiskTarget, count: int) -> np.ndarray:
    angles = 2 * np.pi * np.arange(count) / count
    return disk.center + disk.radius * np.exp(1j * angles)


def interior_mesh(disk: DiskTarget, spacing: float) -> np.ndarray:
    steps = int(math.floor(disk.radius / spacing))
    grid = np.arange(-steps, steps + 1) * spacing
    offsets = (grid[None, :] + 1j * grid[:, None]).ravel()
    return disk.center + offsets[np.abs(offsets) < disk.radius]


def fitting_samples(disk: DiskTarget, degree: int) -> np.ndarray:
    """8(degree+1) equiangular boundary points plus an interior mesh of spacing radius/8."""
    return np.concatenate([boundary_points(disk, 8 * (degree + 1)),
                           interior_mesh(disk, disk.radius / 8)])


def validation_samples(disk: DiskTarget, degree: int, density: int = 4) -> np.ndarray:
    """At least ``density`` times denser than the fitting sample, spacing ≤ radius/32."""
    count = max(density * 8 * (degree + 1), int(math.ceil(2 * math.pi * 32)))
    spacing = disk.radius / (8 * density) if density >= 4 else disk.radius / 32
    return np.concatenate([boundary_points(disk, count), interior_mesh(disk, spacing)])


def scale_for(disks: Sequence[DiskTarget]) -> float:
    """R_scale = max(|center| + radius); the variable is z/R_scale."""
    return max(abs(d.center) + d.radius for d in disks)


@dataclass(frozen=True, eq=False)
class NewtonBasis:
    nodes: np.ndarray  # in units of z/scale
    capacity: float
    scale: float

    @property
    def degree(self) -> int:
        return len(self.nodes)

    def matrix(self, z: np.ndarray) -> np.ndarray:
        """Columns ω_0..ω_degree at the points z."""
        u = np.asarray(z, dtype=complex) / self.scale
        W = np.empty((u.size, self.degree + 1), dtype=complex)
        W[:, 0] = 1.0
        for k, node in enumerate(self.nodes):
            W[:, k + 1] = W[:, k] * (u - node) / self.capacity
        return W

    def derivative_matrix(self, z: np.ndarray) -> np.ndarray:
        """Columns dω_k/dz at the points z."""
        u = np.asarray(z, dtype=complex) / self.scale
        W = self.matrix(z)
        D = np.zeros_like(W)
        for k, node in enumerate(self.nodes):
            D[:, k + 1] = (D[:, k] * (u - node) + W[:, k]) / self.capacity
        return D / self.scale

    def poly(self, coeffs: np.ndarray) -> NewtonPoly:
        return NewtonPoly(tuple(coeffs), tuple(self.nodes), self.capacity, self.scale)


def leja_basis(disks: Sequence[DiskTarget], degree: int, scale: float) -> NewtonBasis:
    """Leja sequence of the sampled disk boundaries and its capacity estimate."""
    candidates = np.concatenate([boundary_points(d, 8 * (degree + 1)) for d in disks]) / scale
    nodes = np.empty(degree, dtype=complex)
    if degree == 0:
        return NewtonBasis(nodes, 1.0, scale)
    first = int(np.argmax(np.abs(candidates)))
    nodes[0] = candidates[first]
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(candidates - nodes[0]))
        for k in range(1, degree + 1):
            pick = int(np.argmax(logs))
            if k == degree:
                capacity = math.exp(float(logs[pick]) / degree)
                break
            nodes[k] = candidates[pick]
            logs = logs + np.log(np.abs(candidates - nodes[k]))
    if not (math.isfinite(capacity) and capacity > 0):
        raise IllConditioned("degenerate node set", degree=degree)
    return NewtonBasis(nodes, capacity, scale)


def _gram_chunk(task: Tuple[DiskTarget, NewtonBasis, Optional[np.ndarray]]
                ) -> Tuple[np.ndarray, np.ndarray]:
    """WᴴW and Wᴴ(b − W x) on one disk's fitting sample (x = 0 when absent)."""
    disk, basis, x = task
    z = fitting_samples(disk, basis.degree)
    W = basis.matrix(z)
    r = disk.values(z)
    if x is not None:
        r = r - W @ x
    return W.conj().T @ W, W.conj().T @ r


def _constraint_rows(conditions: Sequence[InterpCondition],
                     basis: NewtonBasis) -> Tuple[np.ndarray, np.ndarray]:
    rows: List[np.ndarray] = []
    rhs: List[complex] = []
    for cond in conditions:
        point = np.array([cond.point])
        rows.append(basis.matrix(point)[0])
        rhs.append(cond.value)
        if cond.deriv is not None:
            rows.append(basis.derivative_matrix(point)[0])
            rhs.append(cond.deriv)
    n = basis.degree + 1
    if not rows:
        return np.zeros((0, n), dtype=complex), np.zeros(0, dtype=complex)
    return np.array(rows, dtype=complex), np.array(rhs, dtype=complex)


class ConstrainedNormalSystem:
    """min ‖W x − b‖ subject to C x = e, through the equilibrated normal system.

    The constraints are eliminated with a QR factorization of Cᴴ; the reduced
    Hermitian system K = Q₂ᴴ G Q₂ is factored once by Cholesky.
    """

    def __init__(self, G: np.ndarray, C: np.ndarray, e: np.ndarray, cond_limit: float):
        diag = np.real(np.diag(G))
        self.d = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 1.0)
        self.Gs = G * self.d[:, None] * self.d[None, :]
        self.Cs = C * self.d[None, :]
        self.e = e
        m, n = self.Cs.shape
        self.condition = 1.0
        if m:
            Q, R = scipy.linalg.qr(self.Cs.conj().T)
            self.R1 = R[:m, :m]
            diag_r = np.abs(np.diag(self.R1))
            if np.min(diag_r) <= 1e-13 * np.max(diag_r):
                raise IllConditioned("interpolation conditions are numerically dependent",
                                     conditions=m, degree=n - 1)
            self.condition = float(np.max(diag_r) / np.min(diag_r))
            self.Q1, self.Q2 = Q[:, :m], Q[:, m:]
        else:
            self.Q2 = np.eye(n, dtype=complex)
        self.chol = None
        if self.Q2.shape[1]:
            K = self.Q2.conj().T @ self.Gs @ self.Q2
            K = (K + K.conj().T) / 2
            cond = float(np.linalg.cond(K))
            self.condition = max(self.condition, cond)
            if not cond <= cond_limit:
                raise IllConditioned("constrained normal system is ill-conditioned",
                                     condition=cond, degree=n - 1)
            try:
                self.chol = scipy.linalg.cho_factor(K)
            except np.linalg.LinAlgError as exc:
                raise IllConditioned("constrained normal system is not positive definite",
                                     degree=n - 1) from exc

    def _particular(self, rhs: np.ndarray) -> np.ndarray:
        return self.Q1 @ scipy.linalg.solve_triangular(self.R1, rhs, trans="C")

    def _project(self, hs: np.ndarray) -> np.ndarray:
        if self.chol is None:
            return np.zeros_like(hs)
        return self.Q2 @ scipy.linalg.cho_solve(self.chol, self.Q2.conj().T @ hs)

    def solve(self, h: np.ndarray) -> np.ndarray:
        """Minimizer for the right-hand side h = Wᴴ b."""
        hs = self.d * h
        xs = self._particular(self.e) if self.Cs.shape[0] else np.zeros_like(hs)
        xs = xs + self._project(hs - self.Gs @ xs)
        if self.Cs.shape[0]:
            for _ in range(2):
                xs = xs + self._particular(self.e - self.Cs @ xs)
        return self.d * xs

    def refine(self, x: np.ndarray, h_residual: np.ndarray) -> np.ndarray:
        """One refinement step from h = Wᴴ(b − W x), constraints re-imposed."""
        xs = x / self.d + self._project(self.d * h_residual)
        if self.Cs.shape[0]:
            for _ in range(2):
                xs = xs + self._particular(self.e - self.Cs @ xs)
        return self.d * xs


def _fit_degree(disks: Sequence[DiskTarget], conditions: Sequence[InterpCondition],
                degree: int, scale: float, cond_limit: float,
                workers: Optional[int]) -> Tuple[NewtonPoly, float]:
    basis = leja_basis(disks, degree, scale)
    C, e = _constraint_rows(conditions, basis)
    parts = ordered_map(_gram_chunk, [(d, basis, None) for d in disks], workers)
    G = sum(p[0] for p in parts)
    h = sum(p[1] for p in parts)
    system = ConstrainedNormalSystem(G, C, e, cond_limit)
    x = system.solve(h)
    parts = ordered_map(_gram_chunk, [(d, basis, x) for d in disks], workers)
    x = system.refine(x, sum(p[1] for p in parts))
    return basis.poly(x), system.condition


def _disk_error(task: Tuple[DiskTarget, Expr, int, int]) -> float:
    disk, p, degree, density = task
    z = validation_samples(disk, degree, density)
    with np.errstate(all="ignore"):
        err = np.abs(np.asarray(p(z)) - disk.values(z))
    return float(np.max(err)) if np.all(np.isfinite(err)) else float("inf")


def sup_errors(p: Expr, disks: Sequence[DiskTarget], degree: int, density: int = 4,
               workers: Optional[int] = None) -> List[float]:
    return ordered_map(_disk_error, [(d, p, degree, density) for d in disks], workers)


def conditions_residual(p: Expr, conditions: Sequence[InterpCondition]) -> float:
    """Largest absolute |p(z) − v| and |p'(z) − v'| over the conditions."""
    if not conditions:
        return 0.0
    dp = p.deriv()
    worst = 0.0
    for cond in conditions:
        worst = max(worst, abs(complex(p(cond.point)) - cond.value))
        if cond.deriv is not None:
            worst = max(worst, abs(complex(dp(cond.point)) - cond.deriv))
    return float(worst) if math.isfinite(worst) else float("inf")


def degree_schedule(start: int, cap: int) -> List[int]:
    degrees = []
    d = max(0, start)
    while d < cap:
        degrees.append(d)
        d = max(1, 2 * d)
    degrees.append(cap)
    return degrees


def approximate(disks: Sequence[DiskTarget], conditions: Sequence[InterpCondition],
                epsilon: float, degree_cap: Optional[int] = None,
                start_degree: Optional[int] = None, workers: Optional[int] = None,
                cond_limit: Optional[float] = None) -> PolyApproximant:
    """Lowest scheduled degree polynomial within epsilon of every disk target.

    Raises:
        DisksOverlap: when two closed disks intersect
        DegreeCapExceeded: no degree up to the cap reaches epsilon; the best
            approximant found is attached as ``details['best']``
        IllConditioned: conflicting near-coincident conditions, or epsilon was
            not reached and some scheduled degree had a singular or
            ill-conditioned system or a conditions residual at or above the
            limit; raise degree_cap or relax epsilon
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not disks:
        raise ValueError("at least one disk is required")
    degree_cap = settings.RUNGE_DEGREE_CAP if degree_cap is None else degree_cap
    start_degree = settings.RUNGE_START_DEGREE if start_degree is None else start_degree
    cond_limit = settings.RUNGE_COND_LIMIT if cond_limit is None else cond_limit
    residual_limit = settings.RUNGE_RESIDUAL_LIMIT
    check_disjoint(disks)
    for cond in conditions:
        if not any(d.contains(cond.point) for d in disks):
            raise ValueError(f"interpolation point {cond.point} lies in no disk")
    conditions = merge_conditions(conditions)

    scale = scale_for(disks)
    constant = _constant_solution(disks, conditions, scale)
    if constant is not None:
        return constant

    best: Optional[PolyApproximant] = None
    rejected: List[Dict[str, Any]] = []
    for degree in degree_schedule(start_degree, degree_cap):
        if sum(1 + (c.deriv is not None) for c in conditions) > degree + 1:
            continue
        try:
            p, cond = _fit_degree(disks, conditions, degree, scale, cond_limit, workers)
        except IllConditioned as exc:
            rejected.append({"degree": degree, "reason": str(exc),
                             "condition": exc.details.get("condition")})
            logger.warning("runge degree skipped", extra={"degree": degree, "reason": str(exc)})
            continue
        residual = conditions_residual(p, conditions)
        if not residual < residual_limit:
            rejected.append({"degree": degree, "reason": "conditions residual over limit",
                             "residual": residual})
            logger.warning("runge degree skipped",
                           extra={"degree": degree, "conditions_residual": residual})
            continue
        errors = sup_errors(p, disks, degree, workers=workers)
        fit = PolyApproximant.from_expr(p, max(errors), residual, cond)
        logger.debug("runge degree tried", extra={"degree": degree, "sup_error": fit.sup_error})
        if best is None or fit.sup_error <= best.sup_error:
            best = fit
        if fit.sup_error <= epsilon:
            logger.info("runge fit", extra={"degree": degree, "sup_error": fit.sup_error,
                                            "disks": len(disks), "conditions": len(conditions),
                                            "condition_estimate": cond})
            return fit
    best_error = best.sup_error if best else None
    if rejected:
        raise IllConditioned("epsilon not reached; raise degree_cap or relax epsilon",
                             degree_cap=degree_cap, epsilon=epsilon, rejected=rejected,
                             best_error=best_error, best=best)
    raise DegreeCapExceeded("no degree up to the cap reached epsilon", degree_cap=degree_cap,
                            epsilon=epsilon, best_error=best_error, best=best)


def _constant_solution(disks: Sequence[DiskTarget], conditions: Sequence[InterpCondition],
                       scale: float) -> Optional[PolyApproximant]:
    """Exact degree-0 answer when every target is the same constant."""
    if not all(d.is_constant for d in disks):
        return None
    value = disks[0].target
    if any(d.target != value for d in disks):
        return None
    if any(c.value != value or (c.deriv is not None and c.deriv != 0) for c in conditions):
        return None
    return PolyApproximant((complex(value),), scale, 0j, 0, 0.0, 0.0, 1.0, (complex(value),))


def validate(p: PolyApproximant, disks: Sequence[DiskTarget],
             conditions: Sequence[InterpCondition], density: int = 8,
             workers: Optional[int] = None) -> Dict[str, Any]:
    """Recompute the sup error on a fresh, denser sample and the conditions residual."""
    expr = p.as_expr()
    errors = sup_errors(expr, disks, max(p.degree, 1), density, workers)
    return {"degree": p.degree, "sup_error": max(errors), "per_disk": errors,
            "fitted_sup_error": p.sup_error,
            "conditions_residual": conditions_residual(expr, conditions)}
