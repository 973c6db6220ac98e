"""
Verification suite for the Baker domain of F(z, w) = (e^{-z} + 2z − w, z).

The regions R_α = {Re z > Re w + α + A_α e^{-Re w}}, A_α = e^{-α}/(1 − e^{-α}),
are forward invariant, orbits in them drift like Re z_n ≥ Re z_0 + nα, and
ψ = lim L^{-n}∘F^n conjugates F to L(z, w) = (2z − w, z) with image in
Ω = {Re(z − w) > 0}.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from config import settings
from src.core.henon import HenonMap, spectral_norm
from src.core.projective import LIMIT_BAKER, ProjPoint, fs_distance
from src.dynamics.orbit import EscapeKind, classify_orbits, equicontinuity_probe
from src.utils.error_handler import NotInRegion
from src.utils.parallel import chunk_ranges, ordered_map

logger = logging.getLogger(__name__)

BAKER_F = "exp(-z) + 2*z"


def baker_map() -> HenonMap:
    return HenonMap.standard(BAKER_F, 1.0)


@dataclass(frozen=True)
class BakerRegionParams:
    alpha: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def A_alpha(self) -> float:
        return math.exp(-self.alpha) / -math.expm1(-self.alpha)

    def eta(self, x: np.ndarray) -> np.ndarray:
        """η_α(x) = A_α e^{-x}."""
        with np.errstate(over="ignore"):
            return self.A_alpha * np.exp(-np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ConjugacyResult:
    psi_value: Tuple[complex, complex]
    terms_used: int
    tail_bound: float
    in_Omega: bool
    alpha: float
    pullback_steps: int = 0

    def to_dict(self) -> dict:
        return {"psi": [[c.real, c.imag] for c in self.psi_value], "terms_used": self.terms_used,
                "tail_bound": self.tail_bound, "in_Omega": self.in_Omega, "alpha": self.alpha,
                "pullback_steps": self.pullback_steps}


def in_R_alpha(p: np.ndarray, alpha: float) -> np.ndarray:
    """Strict membership test; vectorized over (2, N) batches."""
    p = np.asarray(p, dtype=complex)
    region = BakerRegionParams(alpha)
    re_z, re_w = p[0].real, p[1].real
    with np.errstate(all="ignore"):
        return re_z > re_w + alpha + region.eta(re_w)


def alpha_grid() -> np.ndarray:
    return np.geomspace(settings.BAKER_ALPHA_MIN, settings.BAKER_ALPHA_MAX, settings.BAKER_ALPHA_NODES)


def membership_alpha(p: np.ndarray) -> Optional[float]:
    """Largest α of the log-spaced grid with p ∈ R_α, or None."""
    best = None
    for alpha in alpha_grid():
        if bool(in_R_alpha(p, float(alpha))):
            best = float(alpha)
    return best


def L_pow(n: int, p: np.ndarray) -> np.ndarray:
    """L^n(z, w) = ((n+1)z − nw, nz − (n−1)w), valid for negative n."""
    p = np.asarray(p, dtype=complex)
    z, w = p[0], p[1]
    return np.stack([(n + 1) * z - n * w, n * z - (n - 1) * w])


def L_matrix(n: int) -> np.ndarray:
    return np.array([[n + 1, -n], [n, -(n - 1)]], dtype=complex)


def sample_R_alpha(alpha: float, max_modulus: float, count: int, seed: int) -> np.ndarray:
    """Rejection samples of R_α with both coordinates of modulus ≤ max_modulus, as (2, count)."""
    rng = np.random.default_rng(seed)
    chunks: List[np.ndarray] = []
    have = 0
    while have < count:
        batch = max(1024, 2 * (count - have))
        radius = max_modulus * np.sqrt(rng.random((2, batch)))
        angle = 2 * np.pi * rng.random((2, batch))
        candidate = radius * np.exp(1j * angle)
        keep = candidate[:, in_R_alpha(candidate, alpha)]
        chunks.append(keep)
        have += keep.shape[1]
    return np.concatenate(chunks, axis=1)[:, :count]


def _invariance_chunk(task: Tuple[float, np.ndarray]) -> np.ndarray:
    alpha, points = task
    image = baker_map().apply(points)
    return np.flatnonzero(~in_R_alpha(image, alpha))


def verify_invariance(alpha: float, max_modulus: float, n_samples: int, seed: int = 0,
                      workers: Optional[int] = None, samples: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """Fraction of R_α samples whose image stays in R_α; violators are returned verbatim."""
    points = sample_R_alpha(alpha, max_modulus, n_samples, seed) if samples is None else samples
    ranges = chunk_ranges(points.shape[1], max(1, points.shape[1] // 64))
    tasks = [(alpha, points[:, r.start:r.stop]) for r in ranges]
    bad = [r.start + idx for r, found in zip(ranges, ordered_map(_invariance_chunk, tasks, workers))
           for idx in found]
    violators = [[[c.real, c.imag] for c in points[:, i]] for i in bad]
    total = points.shape[1]
    report = {"alpha": alpha, "samples": total, "violations": len(bad),
              "fraction_invariant": (total - len(bad)) / total if total else 1.0,
              "violating_samples": violators}
    logger.info("baker invariance", extra={"alpha": alpha, "samples": total, "violations": len(bad)})
    return report


def verify_drift(alpha: float, max_modulus: float, n_orbits: int, steps: int = 200,
                 seed: int = 0) -> Dict[str, Any]:
    """Check Re z_{n+1} − Re z_n > α + η_α(Re z_n) and Re z_n ≥ Re z_0 + nα along orbits."""
    region = BakerRegionParams(alpha)
    points = sample_R_alpha(alpha, max_modulus, n_orbits, seed)
    orbits = baker_map().iterate_batch(points, steps)
    re_z = orbits[:, 0].real
    step_gain = np.diff(re_z, axis=0)
    slack = step_gain - (alpha + region.eta(re_z[:-1]))
    cumulative = re_z - re_z[0] - alpha * np.arange(steps + 1)[:, None]
    step_fail = np.flatnonzero(np.any(~(slack > 0), axis=0))
    cumulative_fail = np.flatnonzero(np.any(cumulative < 0, axis=0))
    return {"alpha": alpha, "orbits": n_orbits, "steps": steps,
            "step_violations": int(step_fail.size), "cumulative_violations": int(cumulative_fail.size),
            "min_drift_slack": float(np.min(slack))}


def verify_escape(alpha: float, max_modulus: float, n_orbits: int, steps: int = 200,
                  seed: int = 0, orbits: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """Classify R_α orbits; all should escape to [1:1:0]."""
    if orbits is None:
        orbits = baker_map().iterate_batch(sample_R_alpha(alpha, max_modulus, n_orbits, seed), steps)
    batch = classify_orbits(orbits, settings.ORBIT_R_ESCAPE, settings.ORBIT_R_BOUND)
    escaped = batch.kind == EscapeKind.ESCAPES_TO.value
    distances = np.array([
        fs_distance(ProjPoint.of(batch.limit[0, i], batch.limit[1, i], 0), LIMIT_BAKER)
        if escaped[i] else np.inf
        for i in range(orbits.shape[2])
    ])
    to_baker = escaped & (distances < settings.ORBIT_CAUCHY_TOL)
    return {"alpha": alpha, "orbits": int(orbits.shape[2]), "escaped_to_limit": int(to_baker.sum()),
            "failures": int((~to_baker).sum()),
            "max_residual": float(np.max(batch.residual)) if orbits.shape[2] else 0.0,
            "max_limit_distance": float(np.max(distances)) if orbits.shape[2] else 0.0}


def _tail_bound(re_z0: float, alpha: float, n: int) -> float:
    """√2 Σ_{m≥n} (m+1) e^{-Re z0 − mα}, summed in closed form."""
    q = math.exp(-alpha)
    series = q ** n * ((n + 1) / (1 - q) + q / (1 - q) ** 2)
    return math.sqrt(2) * math.exp(-re_z0) * series


def psi(p: np.ndarray, tol: float = 1e-8, alpha: Optional[float] = None,
        pullback: bool = False) -> ConjugacyResult:
    """ψ_N(p) = L^{-N}(F^N(p)) with N the first index whose analytic tail bound is below tol.

    With ``pullback`` a point outside ∪R_α is pushed forward up to
    BAKER_PULLBACK_STEPS times until it lands in some R_α, and
    ψ(p) = L^{-j} ψ(F^j p) is returned.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = np.asarray(p, dtype=complex)
    F = baker_map()
    alpha = membership_alpha(p) if alpha is None else alpha
    if alpha is None or not bool(in_R_alpha(p, alpha)):
        if not pullback:
            raise NotInRegion("point is in no R_alpha of the grid", point=str(p.tolist()))
        return _psi_by_pullback(p, tol)

    re_z0 = float(p[0].real)
    n = 0
    while _tail_bound(re_z0, alpha, n) >= tol:
        n += 1
    orbit = F.iterate(p, n)
    if orbit.overflow:
        raise NotInRegion("orbit overflowed before the tail bound was met", point=str(p.tolist()))
    value = L_pow(-n, orbit.points[-1])
    in_omega = bool((value[0] - value[1]).real > 0)
    return ConjugacyResult((complex(value[0]), complex(value[1])), n,
                           _tail_bound(re_z0, alpha, n), in_omega, alpha)


def _psi_by_pullback(p: np.ndarray, tol: float) -> ConjugacyResult:
    F = baker_map()
    q = p
    for j in range(1, settings.BAKER_PULLBACK_STEPS + 1):
        q, overflow = F.apply_flagged(q)
        if overflow:
            break
        alpha = membership_alpha(q)
        if alpha is not None:
            inner = psi(q, tol, alpha)
            value = L_pow(-j, np.array(inner.psi_value))
            bound = inner.tail_bound * spectral_norm(L_matrix(-j))
            logger.info("psi via pullback", extra={"steps": j, "alpha": alpha})
            return ConjugacyResult((complex(value[0]), complex(value[1])), inner.terms_used + j,
                                   bound, bool((value[0] - value[1]).real > 0), alpha, j)
    raise NotInRegion("orbit never entered the union of R_alpha", point=str(p.tolist()),
                      steps=settings.BAKER_PULLBACK_STEPS)


def _conjugacy_chunk(task: Tuple[np.ndarray, float]) -> np.ndarray:
    points, tol = task
    F = baker_map()
    out = np.empty((3, points.shape[1]))
    for i in range(points.shape[1]):
        p = points[:, i]
        here = psi(p, tol)
        there = psi(F.apply(p), tol)
        lhs = L_pow(1, np.array(here.psi_value))
        out[0, i] = np.linalg.norm(lhs - np.array(there.psi_value))
        out[1, i] = float(here.in_Omega)
        out[2, i] = here.terms_used
    return out


def verify_conjugacy(alpha: float = 1.0, n_samples: int = 1000, tol: float = 1e-8,
                     max_modulus: float = 20.0, seed: int = 0,
                     workers: Optional[int] = None) -> Dict[str, Any]:
    """Residual ‖L(ψ(p)) − ψ(F(p))‖ and Ω-membership over R_α samples."""
    points = sample_R_alpha(alpha, max_modulus, n_samples, seed)
    ranges = chunk_ranges(n_samples, max(1, n_samples // 32))
    parts = ordered_map(_conjugacy_chunk, [(points[:, r.start:r.stop], tol) for r in ranges], workers)
    stats = np.concatenate(parts, axis=1)
    return {"alpha": alpha, "samples": n_samples, "tol": tol,
            "max_conjugacy_residual": float(stats[0].max()),
            "all_in_Omega": bool(stats[1].all()), "max_terms": int(stats[2].max())}


def verify_injectivity(n_pairs: int = 1000, seed: int = 0, tol: float = 1e-10) -> Dict[str, Any]:
    """‖ψ(p) − ψ(q)‖ ≥ 1e-3·‖p − q‖ for nearby pairs in R_1."""
    rng = np.random.default_rng(seed)
    base = sample_R_alpha(1.0, 20.0, 4 * n_pairs, seed)
    worst = np.inf
    checked = 0
    failures = 0
    for i in range(base.shape[1]):
        if checked == n_pairs:
            break
        p = base[:, i]
        offset = rng.standard_normal(4)
        offset *= rng.random() / np.linalg.norm(offset)
        q = p + offset[:2] + 1j * offset[2:]
        if not bool(in_R_alpha(q, 1.0)) or np.allclose(p, q):
            continue
        gap = np.linalg.norm(np.array(psi(p, tol, 1.0).psi_value) - np.array(psi(q, tol, 1.0).psi_value))
        ratio = gap / np.linalg.norm(p - q)
        worst = min(worst, ratio)
        failures += int(ratio < 1e-3)
        checked += 1
    return {"pairs": checked, "min_ratio": float(worst), "failures": failures}


def absorption_test(alpha: float = 1.0, n_samples: int = 200, seed: int = 0,
                    probe_radius: float = 0.05, probe_samples: int = 16, probe_n: int = 50,
                    fatou_threshold: float = 0.1, max_steps: int = 500) -> Dict[str, Any]:
    """Slab samples {0 < Re(z−w) < α, moduli ≤ 10} that probe as Fatou should enter R_{α/3}.

    Fatou membership is the heuristic equicontinuity proxy; excluded samples
    are reported, not treated as failures.
    """
    rng = np.random.default_rng(seed)
    F = baker_map()
    tested = absorbed = 0
    excluded: List[list] = []
    not_absorbed: List[list] = []
    drawn = 0
    while drawn < n_samples:
        z, w = 10 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
        if not 0 < (z - w).real < alpha:
            continue
        drawn += 1
        p = np.array([z, w])
        if equicontinuity_probe(F, p, probe_radius, probe_samples, probe_n, seed) >= fatou_threshold:
            excluded.append([[z.real, z.imag], [w.real, w.imag]])
            continue
        tested += 1
        orbit = F.iterate(p, max_steps)
        if np.any(in_R_alpha(orbit.points.T, alpha / 3)):
            absorbed += 1
        else:
            not_absorbed.append([[z.real, z.imag], [w.real, w.imag]])
    return {"alpha": alpha, "drawn": drawn, "tested": tested, "absorbed": absorbed,
            "excluded": len(excluded), "not_absorbed": not_absorbed, "heuristic": True}


def limit_point_report(alpha: float = 1.0, n_samples: int = 200, steps: int = 200,
                       seed: int = 0) -> Dict[str, Any]:
    """[1:1:0] attracts every orbit from R_α.

    Orbits started with Re(z − w) in [−10, −5] are tallied by whether they
    escape, overflow or neither; they do not all reach the limit point.
    """
    inside = verify_escape(alpha, 20.0, n_samples, steps, seed)
    rng = np.random.default_rng(seed + 1)
    w = 5 + 10 * rng.random(n_samples) + 1j * rng.uniform(-5, 5, n_samples)
    z = w - 5 - 5 * rng.random(n_samples)
    orbits = baker_map().iterate_batch(np.vstack([z, w]), steps)
    batch = classify_orbits(orbits, settings.ORBIT_R_ESCAPE, settings.ORBIT_R_BOUND)
    outside_escape = int(np.sum(batch.kind == EscapeKind.ESCAPES_TO.value))
    return {"inside_to_limit": inside["escaped_to_limit"], "inside_samples": n_samples,
            "outside_escaping": outside_escape, "outside_overflowed": int(batch.overflow.sum()),
            "outside_samples": n_samples}
