"""
Inductive construction of an entire f for which F(z, w) = (f(z) + aw, az)
has an oscillating wandering domain.

Each round keeps f_k on D(0, R_k), sends the last orbit point P_{n_k} around a
contracting detour of constant-target disks, drops it onto the stable
manifold of the saddle at the origin, lets it pass within 1/(k+1) of the
saddle and leave along the unstable manifold to a point beyond R_{k+1}. A
Runge fit produces f_{k+1}. Calibrated radii β_n make every ball B(P_n, β_n)
map strictly inside the next one.
"""
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from config import settings
from src.core.expr import Expr, NewtonPoly, Poly
from src.core.henon import HenonMap
from src.constructions.manifolds import (
    ShotOrbit, lambda_shoot, linearize, manifold_target
)
from src.constructions.runge import DiskTarget, InterpCondition, PolyApproximant, approximate
from src.dynamics.orbit import OrbitRecord, batch_spectral_norms, classify
from src.utils.error_handler import (
    DegreeCapExceeded, IllConditioned, Infeasible, WorkbenchError
)

logger = logging.getLogger(__name__)

SPHERE_SAMPLES = 64
RADIUS_MARGIN = 0.05
BACKWARD_SAFETY = 1.15
INTERP_TOL = 1e-8


def _poly_to_dict(p: Expr) -> dict:
    if isinstance(p, NewtonPoly):
        return {"kind": "newton", "coeffs": [[c.real, c.imag] for c in p.coeffs],
                "nodes": [[x.real, x.imag] for x in p.nodes], "capacity": p.capacity,
                "scale": p.scale}
    if isinstance(p, Poly):
        return {"kind": "monomial", "coeffs": [[c.real, c.imag] for c in p.coeffs],
                "scale": p.scale, "center": [p.center.real, p.center.imag]}
    raise TypeError(f"cannot store {type(p).__name__} as a polynomial")


def _poly_from_dict(data: dict) -> Expr:
    coeffs = tuple(complex(re, im) for re, im in data["coeffs"])
    if data.get("kind") == "newton":
        return NewtonPoly(coeffs, tuple(complex(re, im) for re, im in data["nodes"]),
                          data["capacity"], data["scale"])
    return Poly(coeffs, data["scale"], complex(*data["center"]))


@dataclass(frozen=True, eq=False)
class ConstructionState:
    """Everything known after round k."""
    k: int
    f: Expr
    orbit: np.ndarray            # (n_k + 1, 2)
    betas: np.ndarray            # β_0 .. β_{n_k}
    thetas: Tuple[float, ...]    # θ_0 .. θ_k
    radii: Tuple[float, ...]     # R_0 .. R_k
    epsilons: Tuple[float, ...]  # ε_1 .. ε_k
    marks: Tuple[int, ...]       # n_0 .. n_k
    primes: Tuple[int, ...]      # n'_0 .. n'_{k-1}
    a: float = 0.5
    b: float = 1.0
    c: float = 0.9
    a_prime: float = 0.55
    a_second: float = 0.45
    f_prev: Optional[Expr] = None
    history: Tuple[Dict[str, Any], ...] = ()

    @property
    def n_k(self) -> int:
        return self.marks[-1]

    @property
    def theta(self) -> float:
        return self.thetas[-1]

    @property
    def R(self) -> float:
        return self.radii[-1]

    @property
    def map(self) -> HenonMap:
        return HenonMap.alternative(self.f, self.a)

    @property
    def previous_map(self) -> Optional[HenonMap]:
        return None if self.f_prev is None else HenonMap.alternative(self.f_prev, self.a)

    def rho(self, n: int) -> int:
        """The round whose detour-to-saddle window [n'_{ρ-1}, n'_ρ) contains n (n'_{-1} = 0)."""
        for j, prime in enumerate(self.primes):
            if n < prime:
                return j
        return len(self.primes)

    def orbit_rows(self) -> List[Dict[str, Any]]:
        return [{"n": n, "z_re": p[0].real, "z_im": p[0].imag, "w_re": p[1].real,
                 "w_im": p[1].imag, "beta": float(self.betas[n]), "rho": self.rho(n)}
                for n, p in enumerate(self.orbit)]

    def to_dict(self) -> dict:
        return {
            "k": self.k, "a": self.a, "b": self.b, "c": self.c,
            "a_prime": self.a_prime, "a_second": self.a_second,
            "f": _poly_to_dict(self.f),
            "f_prev": None if self.f_prev is None else _poly_to_dict(self.f_prev),
            "orbit": [[[p.real, p.imag] for p in row] for row in self.orbit],
            "betas": self.betas.tolist(),
            "thetas": list(self.thetas), "radii": list(self.radii),
            "epsilons": list(self.epsilons), "marks": list(self.marks),
            "primes": list(self.primes), "history": list(self.history),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConstructionState":
        orbit = np.array([[complex(re, im) for re, im in row] for row in data["orbit"]],
                         dtype=complex)
        return cls(
            k=int(data["k"]), f=_poly_from_dict(data["f"]), orbit=orbit,
            betas=np.asarray(data["betas"], dtype=float),
            thetas=tuple(data["thetas"]), radii=tuple(data["radii"]),
            epsilons=tuple(data["epsilons"]), marks=tuple(data["marks"]),
            primes=tuple(data["primes"]), a=data["a"], b=data["b"], c=data["c"],
            a_prime=data["a_prime"], a_second=data["a_second"],
            f_prev=None if data.get("f_prev") is None else _poly_from_dict(data["f_prev"]),
            history=tuple(data.get("history", ())),
        )


def seed_state(z0: complex = 7.0, w0: complex = 0.0, a: float = 0.5, b: float = 1.0,
               c: Optional[float] = None, a_prime: Optional[float] = None,
               a_second: Optional[float] = None) -> ConstructionState:
    """Round 0: f_0(z) = bz, R_0 = θ_0 = 1, β_0 = 1/2, P_0 = (z0, w0)."""
    c = settings.OSC_C if c is None else c
    a_prime = settings.OSC_A_PRIME if a_prime is None else a_prime
    a_second = settings.OSC_A_SECOND if a_second is None else a_second
    if not 0 < a_second < a < a_prime < c < 1:
        raise ValueError("constants must satisfy 0 < a'' < a < a' < c < 1")
    if not abs(z0) > 6:
        raise ValueError("|z0| must exceed R_0 + 5θ_0 = 6")
    return ConstructionState(
        k=0, f=Poly((0j, b)), orbit=np.array([[z0, w0]], dtype=complex),
        betas=np.array([0.5]), thetas=(1.0,), radii=(1.0,), epsilons=(), marks=(0,),
        primes=(), a=a, b=b, c=c, a_prime=a_prime, a_second=a_second)


def sphere_directions(count: int, seed: int = 0) -> np.ndarray:
    """Unit vectors of ℂ² as a (2, count) array."""
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((4, count))
    gauss /= np.linalg.norm(gauss, axis=0)
    return gauss[:2] + 1j * gauss[2:]


def _disk_samples(center: complex, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    angle = rng.uniform(0, 2 * np.pi, count)
    r = radius * np.sqrt(rng.random(count))
    return center + r * np.exp(1j * angle)


def contraction_check(m: HenonMap, inner: Tuple[complex, float], outer: Tuple[complex, float],
                      s: complex, a_prime: float, a_second: float,
                      n_pairs: int = 10_000, seed: int = 0) -> Dict[str, Any]:
    """Empirical bi-Lipschitz bounds of F on pairs with first coordinates in the inner disk.

    When |f − s| stays below the certified α on the outer disk, the ratio
    ‖F(p) − F(q)‖/‖p − q‖ lies in [a'', a'] for every such pair.
    """
    (c1, r1), (c2, r2) = (complex(inner[0]), float(inner[1])), (complex(outer[0]), float(outer[1]))
    a = abs(m.a)
    ordered = 0 < a_second < a < a_prime < 1 and abs(c1 - c2) + r1 < r2
    alpha = min(a_prime - a, a - a_second) * (r2 - r1 - abs(c1 - c2)) if ordered else 0.0

    rng = np.random.default_rng(seed)
    probe = np.concatenate([c2 + r2 * np.exp(2j * np.pi * np.arange(256) / 256),
                            _disk_samples(c2, r2, 256, rng)])
    deviation = float(np.max(np.abs(np.asarray(m.f(probe)) - s)))

    w_radius = max(1.0, r2)
    p = np.stack([_disk_samples(c1, r1, n_pairs, rng), _disk_samples(0j, w_radius, n_pairs, rng)])
    q = np.stack([_disk_samples(c1, r1, n_pairs, rng), _disk_samples(0j, w_radius, n_pairs, rng)])
    with np.errstate(all="ignore"):
        ratio = np.linalg.norm(m.apply(p) - m.apply(q), axis=0) / np.linalg.norm(p - q, axis=0)
    ratio = ratio[np.isfinite(ratio)]
    low, high = float(ratio.min()), float(ratio.max())
    return {"pairs": int(ratio.size), "min_ratio": low, "max_ratio": high,
            "lower_ok": low >= a_second, "upper_ok": high <= a_prime,
            "ordering_ok": ordered, "alpha_certified": alpha, "deviation": deviation,
            "deviation_within_alpha": ordered and deviation <= alpha}


@dataclass(frozen=True, eq=False)
class DetourPlan:
    z: np.ndarray  # z''_0 .. z''_N
    w: np.ndarray  # w''_0 .. w''_N
    radius: float

    @property
    def steps(self) -> int:
        return len(self.z) - 1

    def targets(self, a: float, z_prime_0: complex) -> np.ndarray:
        """Constant Runge targets z''_{j+1} − a w''_j, closing with z'_0 − a w''_N."""
        nxt = np.append(self.z[1:], z_prime_0)
        return nxt - a * self.w


def plan_detour(z_nk: complex, w_nk: complex, w_prime_0: complex, steps: int, a: float,
                radius: Optional[float] = None, min_spacing: float = 2.0) -> DetourPlan:
    """Points z''_0 = z_{n_k}, z''_1..z''_{N-1} on a circle, z''_N = w'_0/a.

    Intermediate points sit at equal angles from arg z_{n_k} on the circle of
    the given radius (default |z_{n_k}| + 3). Raises Infeasible when two of
    z''_0..z''_{N-1} are within max(2, min_spacing) of each other.
    """
    if steps < 1:
        raise ValueError("a detour needs at least one step")
    z_nk = complex(z_nk)
    radius = abs(z_nk) + 3.0 if radius is None else float(radius)
    if not radius > abs(z_nk) + 2:
        raise ValueError("detour circle must lie outside |z| = |z_nk| + 2")
    start = math.atan2(z_nk.imag, z_nk.real)
    angles = start + 2 * np.pi * np.arange(1, steps) / steps
    z = np.concatenate([[z_nk], radius * np.exp(1j * angles), [complex(w_prime_0) / a]])
    spacing = max(2.0, min_spacing)
    head = z[:steps]
    if steps > 1:
        gaps = np.abs(head[:, None] - head[None, :]) + np.diag(np.full(steps, np.inf))
        closest = float(gaps.min())
        if not closest > spacing:
            raise Infeasible("detour points too close for the circle radius",
                             steps=steps, radius=radius, closest=closest, spacing=spacing)
    w = np.empty(steps + 1, dtype=complex)
    w[0] = w_nk
    w[1:] = a * z[:-1]
    return DetourPlan(z, w, radius)


def backward_radii(m: HenonMap, points: np.ndarray, end_radius: float, cap: float,
                   seed: int = 0) -> np.ndarray:
    """β̃_M = end_radius and β̃_j = β̃_{j+1} / (1.15 · sup ‖dF‖ on B(Q_j, β̃_j)), capped."""
    count = len(points)
    radii = np.empty(count)
    radii[-1] = min(end_radius, cap)
    dirs = sphere_directions(SPHERE_SAMPLES, seed)
    for j in range(count - 2, -1, -1):
        center_norm = batch_spectral_norms(m.differential(points[j][:, None]))[0]
        guess = min(cap, radii[j + 1] / (BACKWARD_SAFETY * center_norm))
        sphere = points[j][:, None] + guess * dirs
        lipschitz = max(center_norm, float(batch_spectral_norms(m.differential(sphere)).max()))
        radii[j] = min(cap, radii[j + 1] / (BACKWARD_SAFETY * lipschitz))
    return radii


def _detour_steps(beta_nk: float, beta_start: float, c: float) -> int:
    n = 1
    while c ** n * beta_nk >= beta_start:
        n += 1
    return n


def _next_theta(theta_k: float, R_k: float, z_nk: complex, z_end: complex,
                z_prime: np.ndarray, shrink: int = 0) -> float:
    """Largest θ_k/2^j with j > shrink separating the transition disks from each other and K."""
    for j in range(1 + shrink, 31 + shrink):
        th = theta_k / 2 ** j
        special = [(z_nk, theta_k), (z_end, th), (complex(z_prime[-1]), th)]
        body = [(0j, R_k)] + [(complex(z), th) for z in z_prime[:-1]]
        ok = all(abs(p[0] - q[0]) > p[1] + q[1]
                 for i, p in enumerate(special) for q in special[i + 1:])
        ok = ok and all(abs(p[0] - q[0]) > p[1] + q[1] for p in special for q in body)
        if ok:
            return th
    raise Infeasible("no θ_k/2^j separates the transition disks", theta=theta_k)


@dataclass(frozen=True, eq=False)
class RoundPlan:
    shot: ShotOrbit
    detour: DetourPlan
    theta: float
    R: float
    A: float
    backward: np.ndarray


def _plan_round(state: ConstructionState, seed: int, shrink: int = 0) -> RoundPlan:
    F = state.map
    k, a = state.k, state.a
    z_nk, w_nk = state.orbit[-1]
    theta_k, R_k, beta_nk = state.theta, state.R, float(state.betas[-1])

    stable = linearize(F, "stable")
    unstable = linearize(F, "unstable")
    s_target = manifold_target(F, stable, a * (abs(z_nk) - 4 * theta_k), coordinate=1)
    u_target = manifold_target(F, unstable, abs(z_nk) - 2 * theta_k, coordinate=0,
                               avoid=complex(s_target.point[1]) / a)
    shot = lambda_shoot(F, s_target, u_target, ball_radius=1.0 / (k + 1))
    z_prime = shot.points[:, 0]
    w_prime_0 = complex(shot.points[0, 1])

    theta = _next_theta(theta_k, R_k, complex(z_nk), w_prime_0 / a, z_prime, shrink)
    backward = backward_radii(F, shot.points, theta / 2, theta / 2, seed)
    steps = _detour_steps(beta_nk, float(backward[0]), state.c)

    radius = abs(z_nk) + 3.0
    for _ in range(50):
        try:
            detour = plan_detour(z_nk, w_nk, w_prime_0, steps, a, radius,
                                 min_spacing=2.0 + 2.0 * theta_k)
            break
        except Infeasible:
            radius *= 1.25
            logger.info("detour circle enlarged", extra={"round": k, "radius": radius})
    else:
        raise Infeasible("detour does not fit on any tried circle", steps=steps, radius=radius)

    reach = max(float(np.max(np.abs(detour.z[:-1]))) + theta_k,
                float(np.max(np.abs(detour.z))) + theta,
                float(np.max(np.abs(z_prime))) + theta)
    R_new = reach + theta / 2
    A = R_new + 6 * theta + abs(a * shot.points[-1, 1])
    return RoundPlan(shot, detour, theta, R_new, A, backward)


def _runge_problem(state: ConstructionState, plan: RoundPlan
                   ) -> Tuple[List[DiskTarget], List[InterpCondition]]:
    a, f_k = state.a, state.f
    z_prime = plan.shot.points[:, 0]
    detour = plan.detour
    steps = detour.steps
    targets = detour.targets(a, complex(z_prime[0]))

    disks = [DiskTarget(0j, state.R, f_k)]
    disks += [DiskTarget(z, plan.theta, f_k) for z in z_prime[:-1]
              if abs(z) + plan.theta > state.R]
    disks += [DiskTarget(detour.z[j], state.theta, targets[j]) for j in range(steps)]
    disks.append(DiskTarget(detour.z[steps], plan.theta, targets[steps]))
    disks.append(DiskTarget(z_prime[-1], plan.theta, plan.A))

    conditions = [InterpCondition(0j, 0j, state.b)]
    conditions += [InterpCondition(z, f_k(complex(z))) for z in state.orbit[:-1, 0]]
    conditions += [InterpCondition(z, f_k(complex(z))) for z in z_prime[:-1]]
    conditions.append(InterpCondition(z_prime[-1], plan.A))
    conditions += [InterpCondition(detour.z[j], targets[j]) for j in range(steps + 1)]
    return disks, conditions


def _assemble(state: ConstructionState, plan: RoundPlan, fit: PolyApproximant,
              epsilon: float) -> ConstructionState:
    a, c = state.a, state.c
    detour, shot = plan.detour, plan.shot
    steps, length = detour.steps, shot.length
    tail = np.array([[plan.A + a * shot.points[-1, 1], a * shot.points[-1, 0]]], dtype=complex)
    detour_points = np.column_stack([detour.z[1:], detour.w[1:]])
    orbit = np.vstack([state.orbit, detour_points, shot.points, tail])

    beta_nk = float(state.betas[-1])
    betas = np.concatenate([state.betas, beta_nk * c ** np.arange(1, steps + 1),
                            plan.backward, [c * plan.backward[-1]]])
    n_prime = state.n_k + steps + 1
    n_next = n_prime + length + 1
    return replace(
        state, k=state.k + 1, f=fit.as_expr(), f_prev=state.f, orbit=orbit, betas=betas,
        thetas=state.thetas + (plan.theta,), radii=state.radii + (plan.R,),
        epsilons=state.epsilons + (epsilon,), marks=state.marks + (n_next,),
        primes=state.primes + (n_prime,))


def next_round(state: ConstructionState, workers: Optional[int] = None,
               degree_cap: Optional[int] = None, seed: int = 0) -> ConstructionState:
    """Round k → k+1. The input state is never modified; errors leave it as it was.

    When the Runge step cannot reach epsilon, or no epsilon passes
    verification, the round is planned again with θ_{k+1} halved, up to
    OSC_THETA_RETRIES times; the last failure is raised.

    Raises:
        ShootFailed, Infeasible, DegreeCapExceeded, IllConditioned, DisksOverlap
    """
    failure: Optional[WorkbenchError] = None
    for shrink in range(settings.OSC_THETA_RETRIES + 1):
        plan = _plan_round(state, seed, shrink)
        try:
            return _fit_round(state, plan, workers, degree_cap, seed)
        except (DegreeCapExceeded, IllConditioned, Infeasible) as exc:
            failure = exc
            logger.warning("round failed, halving theta",
                           extra={"round": state.k + 1, "theta": plan.theta,
                                  "error": type(exc).__name__, "reason": str(exc)})
    raise failure


def _fit_round(state: ConstructionState, plan: RoundPlan, workers: Optional[int],
               degree_cap: Optional[int], seed: int) -> ConstructionState:
    disks, conditions = _runge_problem(state, plan)
    budget = min(state.a_prime - state.a, state.a - state.a_second) * plan.theta / 2
    epsilon = min(2.0 ** -(state.k + 1), budget)

    report: Dict[str, Any] = {}
    for attempt in range(settings.OSC_EPS_RETRIES + 1):
        fit = approximate(disks, conditions, epsilon, degree_cap=degree_cap, workers=workers)
        candidate = _assemble(state, plan, fit, epsilon)
        report = verify_round(candidate, seed=seed)
        pairs = _detour_contraction(candidate, plan, seed)
        pairs_ok = all(p["lower_ok"] and p["upper_ok"] for p in pairs)
        if report["all_pass"] and pairs_ok:
            record = {"round": state.k + 1, "epsilon": epsilon, "retries": attempt,
                      "degree": fit.degree, "sup_error": fit.sup_error,
                      "condition_estimate": fit.condition_estimate,
                      "detour_steps": plan.detour.steps, "detour_radius": plan.detour.radius,
                      "shoot_length": plan.shot.length, "shoot_min_norm": plan.shot.min_norm,
                      "shoot_end_error": plan.shot.end_error, "theta": plan.theta,
                      "R": plan.R, "A": plan.A, "pairs_checked": len(pairs)}
            logger.info("construction round", extra=record)
            return replace(candidate, history=state.history + (record,))
        logger.warning("round verification failed, tightening epsilon",
                       extra={"round": state.k + 1, "epsilon": epsilon, "attempt": attempt})
        epsilon /= 2
    raise Infeasible("round fails verification at every tried epsilon",
                     round=state.k + 1, epsilon=epsilon * 2, report=report)


def _detour_contraction(state: ConstructionState, plan: RoundPlan, seed: int,
                        n_pairs: int = 1000) -> List[Dict[str, Any]]:
    F = state.map
    z_prime = plan.shot.points[:, 0]
    targets = plan.detour.targets(state.a, complex(z_prime[0]))
    disks = [(z, state.thetas[-2], s) for z, s in zip(plan.detour.z[:-1], targets[:-1])]
    disks.append((plan.detour.z[-1], plan.theta, targets[-1]))
    disks.append((complex(z_prime[-1]), plan.theta, plan.A))
    return [contraction_check(F, (z, r / 2), (z, r), s, state.a_prime, state.a_second,
                              n_pairs, seed + i) for i, (z, r, s) in enumerate(disks)]


def _prop(ok: bool, margin: Optional[float], **extra: Any) -> Dict[str, Any]:
    return {"pass": bool(ok), "margin": margin, **extra}


def verify_round(state: ConstructionState, seed: int = 0) -> Dict[str, Any]:
    """Check the five inductive properties of a state."""
    F, k, n_k = state.map, state.k, state.n_k
    P = state.orbit
    props: Dict[str, Any] = {}

    if k >= 1 and state.f_prev is not None:
        R_old, eps = state.radii[-2], state.epsilons[-1]
        rng = np.random.default_rng(seed)
        z = np.concatenate([R_old * np.exp(2j * np.pi * np.arange(1024) / 1024),
                            _disk_samples(0j, R_old, 1024, rng)])
        sup = float(np.max(np.abs(np.asarray(state.f(z)) - np.asarray(state.f_prev(z)))))
        props["i"] = _prop(sup <= eps, eps - sup, sup=sup, epsilon=eps)
    else:
        props["i"] = _prop(True, None)

    if n_k > 0:
        images = F.apply(P[:-1].T).T
        scale = np.maximum(1.0, np.linalg.norm(P[1:], axis=1))
        rel = np.linalg.norm(images - P[1:], axis=1) / scale
        worst = float(rel.max())
        props["ii"] = _prop(worst < INTERP_TOL, INTERP_TOL - worst, max_residual=worst)
    else:
        props["ii"] = _prop(True, None)

    rho = np.array([state.rho(n) for n in range(n_k + 1)])
    theta = np.asarray(state.thetas)[rho]
    caps_ok = bool(np.all(state.betas <= theta / 2 * (1 + 1e-12)))
    if n_k > 0:
        dirs = sphere_directions(SPHERE_SAMPLES, seed)
        worst = np.inf
        for n in range(n_k):
            sphere = np.column_stack([P[n], P[n][:, None] + state.betas[n] * dirs])
            dist = np.linalg.norm(F.apply(sphere) - P[n + 1][:, None], axis=0).max()
            slack = ((1 - RADIUS_MARGIN) * state.betas[n + 1] - dist) / state.betas[n + 1]
            worst = min(worst, float(slack))
        props["iii"] = _prop(worst >= 0 and caps_ok, worst, radius_caps=caps_ok)
    else:
        props["iii"] = _prop(caps_ok, None, radius_caps=caps_ok)

    z_abs = np.abs(P[:, 0])
    inner = (state.R - theta[:-1]) - z_abs[:-1]
    inner_slack = float(inner.min()) if n_k > 0 else None
    outer_slack = float(z_abs[-1] - (state.R + 5 * state.theta))
    ok_iv = (inner_slack is None or inner_slack > 0) and outer_slack > 0
    props["iv"] = _prop(ok_iv, min(x for x in (inner_slack, outer_slack) if x is not None),
                        outer_slack=outer_slack, inner_slack=inner_slack)

    if k >= 1:
        lo, hi = state.marks[-2], state.marks[-1]
        closest = float(np.linalg.norm(P[lo:hi + 1], axis=1).min())
        props["v"] = _prop(closest < 1.0 / k, 1.0 / k - closest, closest=closest)
    else:
        props["v"] = _prop(True, None)

    return {"round": k, "n_k": n_k, "properties": props,
            "all_pass": all(p["pass"] for p in props.values())}


def g_probe(state: ConstructionState, points: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    """g_n(p) = log‖F^n(p) − P_n‖ / n for each column of a (2, N) batch."""
    n = state.n_k if n is None else n
    if not 1 <= n <= state.n_k:
        raise ValueError("n must lie in [1, n_k]")
    orbits = state.map.iterate_batch(np.asarray(points, dtype=complex), n)
    with np.errstate(all="ignore"):
        return np.log(np.linalg.norm(orbits[n] - state.orbit[n][:, None], axis=0)) / n


def detour_ratios(state: ConstructionState, seed: int = 0) -> Dict[str, Any]:
    """Contraction ratios of F on the calibrated balls along every detour."""
    F = state.map
    dirs = sphere_directions(SPHERE_SAMPLES, seed)
    ratios = []
    for j in range(len(state.primes)):
        for n in range(state.marks[j], state.primes[j]):
            p = state.orbit[n]
            q = p[:, None] + state.betas[n] * dirs
            r = np.linalg.norm(F.apply(q) - F.apply(p)[:, None], axis=0) / state.betas[n]
            ratios.append((n, float(r.min()), float(r.max())))
    lows = [r[1] for r in ratios]
    highs = [r[2] for r in ratios]
    return {"balls": len(ratios), "min_ratio": min(lows) if lows else None,
            "max_ratio": max(highs) if highs else None,
            "within_bounds": all(state.a_second <= lo and hi <= state.a_prime
                                 for _, lo, hi in ratios)}


def oscillation_witness(state: ConstructionState) -> OrbitRecord:
    """Classify P_0 under F_K with r_bound = 1/K and r_escape = R_{K-1}."""
    K = state.k
    if K < 2:
        raise ValueError("an oscillation witness needs at least two rounds")
    return classify(state.map, state.orbit[0], state.n_k, r_escape=state.radii[K - 1],
                    r_bound=1.0 / K, with_cocycle=False)


def construct(rounds: int, state: Optional[ConstructionState] = None,
              workers: Optional[int] = None, seed: int = 0,
              on_round: Optional[Callable[[ConstructionState], None]] = None) -> ConstructionState:
    """Run rounds until ``rounds`` are complete; the callback sees every new state."""
    state = seed_state() if state is None else state
    while state.k < rounds:
        state = next_round(state, workers=workers, seed=seed)
        if on_round is not None:
            on_round(state)
    return state

