"""
Escaping wandering domains from a translation-commuting entire function.

f(z) = z + sin(2πz + 2πα) + λ satisfies f(n) = n + 1 and f'(n) = 0 on ℤ, so
F(z, w) = (f(z) + δ(z − 1) − δw, z) sends P_n = (n, n − 1) to P_{n+1}, and
G = F − (1, 1) fixes every P_n. The basins A_n of G are translates of each
other; F maps A_n onto A_{n+1}.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from src.core.expr import Const, Expr, Sin, Var, add, mul
from src.core.henon import HenonMap, eigenvalues
from src.dynamics.orbit import fit_log_slope
from src.utils.error_handler import DeltaTooLarge, SameBasin
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

STAY_STEPS = 20


@dataclass(frozen=True)
class WanderParams:
    lam: float
    alpha_crit: float
    delta: float

    @property
    def multipliers(self) -> Tuple[complex, complex]:
        """Eigenvalues of dF at every P_n."""
        return eigenvalues(np.array([[self.delta, -self.delta], [1.0, 0.0]], dtype=complex))

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "alpha_crit": self.alpha_crit, "delta": self.delta,
                "multiplier_modulus": abs(self.multipliers[1])}


def make_params(delta: float = 0.05) -> WanderParams:
    if not 0 < delta:
        raise ValueError("delta must be positive")
    lam = 1.0 - math.sqrt(1.0 - 1.0 / (4.0 * math.pi ** 2))
    alpha_crit = math.acos(-1.0 / (2.0 * math.pi)) / (2.0 * math.pi)
    params = WanderParams(lam, alpha_crit, float(delta))
    radius = abs(params.multipliers[1])
    if delta >= 1 or radius >= 1:
        raise DeltaTooLarge("lattice fixed points are not attracting",
                            delta=delta, spectral_radius=radius)
    return params


def f_conj(params: WanderParams) -> Expr:
    """f(z) = f̃(z + α) − α with f̃(z) = z + sin(2πz) + λ."""
    two_pi = 2.0 * math.pi
    phase = add(mul(Const(two_pi), Var()), Const(two_pi * params.alpha_crit))
    return add(add(Var(), Sin(phase)), Const(params.lam))


def build_maps(params: WanderParams) -> Tuple[HenonMap, HenonMap]:
    """F(z, w) = (f(z) + δ(z − 1) − δw, z) and G = F − (1, 1)."""
    d = params.delta
    f_part = add(f_conj(params), add(mul(Const(d), Var()), Const(-d)))
    F = HenonMap.standard(f_part, d)
    return F, F.translated((1.0, 1.0))


def lattice_point(n: int) -> np.ndarray:
    return np.array([n, n - 1], dtype=complex)


def basin_indices(G: HenonMap, points: np.ndarray, n_max: int = 300,
                  capture_radius: float = 0.2) -> np.ndarray:
    """Basin index per column of a (2, N) batch; uncaptured columns get the minimum int64.

    An orbit is captured by P_n when its last STAY_STEPS iterates stay in
    B(P_n, capture_radius). The saddle between adjacent basins lies inside
    that ball, so first entry does not decide the basin.
    """
    if not capture_radius < 0.25:
        raise ValueError("capture_radius must be below 1/4")
    orbits = G.iterate_batch(points, n_max)
    count = orbits.shape[2]
    result = np.full(count, np.iinfo(np.int64).min, dtype=np.int64)
    run = np.zeros(count, dtype=np.int64)
    previous = np.zeros(count)
    with np.errstate(all="ignore"):
        for k in range(n_max + 1):
            z, w = orbits[k]
            cand = np.rint(z.real)
            cand = np.where(np.isfinite(cand), cand, 0.0)
            dist = np.sqrt(np.abs(z - cand) ** 2 + np.abs(w - cand + 1) ** 2)
            inside = dist < capture_radius
            run = np.where(inside & (cand == previous), run + 1, inside.astype(np.int64))
            previous = cand
    captured = run >= STAY_STEPS
    result[captured] = previous[captured].astype(np.int64)
    return result


def basin_index(G: HenonMap, p: np.ndarray, n_max: int = 300,
                capture_radius: float = 0.2) -> Optional[int]:
    """n when the last 20 iterates of the G-orbit of p stay in B(P_n, capture_radius)."""
    index = basin_indices(G, np.asarray(p, dtype=complex)[:, None], n_max, capture_radius)[0]
    return None if index == np.iinfo(np.int64).min else int(index)


def capture_rate(G: HenonMap, p: np.ndarray, index: int, skip: int = 2, steps: int = 12) -> float:
    """Geometric-mean contraction of ‖G^k(p) − P_index‖ over k ∈ [skip, skip + steps]."""
    orbit = G.iterate(p, skip + steps).points
    target = lattice_point(index)
    first = np.linalg.norm(orbit[skip] - target)
    last = np.linalg.norm(orbit[skip + steps] - target)
    return float((last / first) ** (1.0 / steps))


def boundary_growth_test(G: HenonMap, p_in: np.ndarray, p_out: np.ndarray, n: int = 40,
                         n_max: int = 300, capture_radius: float = 0.2) -> Dict[str, Any]:
    """Bisect [p_in, p_out] to a basin-boundary point and fit the cocycle growth there.

    The bisection runs to floating-point resolution, which keeps the orbit of
    the boundary point near the boundary for the whole window k ≤ n.
    """
    p_in = np.asarray(p_in, dtype=complex)
    p_out = np.asarray(p_out, dtype=complex)
    idx_in = basin_index(G, p_in, n_max, capture_radius)
    idx_out = basin_index(G, p_out, n_max, capture_radius)
    if idx_in is None or idx_in == idx_out:
        raise SameBasin("segment endpoints do not lie in different basins",
                        index_in=idx_in, index_out=idx_out)

    a, b = p_in, p_out
    for _ in range(200):
        mid = (a + b) / 2
        if np.array_equal(mid, a) or np.array_equal(mid, b):
            break
        if basin_index(G, mid, n_max, capture_radius) == idx_in:
            a = mid
        else:
            b = mid
    gap = float(np.linalg.norm(b - a))
    if gap > 1e-10:
        raise SameBasin("bisection did not separate the basins", gap=gap)

    norms = G.cocycle_norms(a, n)
    rho = fit_log_slope(norms)
    return {"boundary_point": [[c.real, c.imag] for c in a], "gap": gap,
            "index_in": idx_in, "index_out": idx_out,
            "cocycle_norms": norms.tolist(), "rho": rho}


def interior_growth(G: HenonMap, index: int, n: int = 40) -> float:
    return fit_log_slope(G.cocycle_norms(lattice_point(index), n))


def _probe(task: Tuple[HenonMap, int, np.ndarray, np.ndarray, int]) -> Dict[str, Any]:
    G, m, p_in, p_out, n = task
    report = boundary_growth_test(G, p_in, p_out, n)
    report["rho_interior"] = interior_growth(G, m, n)
    report["lattice_index"] = m
    return report


def probe_boundaries(params: WanderParams, count: int = 100, seed: int = 0, n: int = 40,
                     workers: Optional[int] = None) -> Dict[str, Any]:
    """Random real segments from near P_m to near P_{m+1}, one boundary probe each."""
    _, G = build_maps(params)
    rng = np.random.default_rng(seed)
    tasks = []
    for _ in range(count):
        m = int(rng.integers(-5, 6))
        p_in = lattice_point(m) + rng.uniform(-0.02, 0.02, 2)
        p_out = lattice_point(m + 1) + rng.uniform(-0.02, 0.02, 2)
        tasks.append((G, m, p_in, p_out, n))
    probes: List[Dict[str, Any]] = ordered_map(_probe, tasks, workers)
    rho_b = np.array([p["rho"] for p in probes])
    rho_i = np.array([p["rho_interior"] for p in probes])
    misordered = int(np.sum(~(rho_b > rho_i)))
    logger.info("boundary probes", extra={"count": count, "misordered": misordered})
    return {"params": params.to_dict(), "seed": seed, "probes": count, "n": n,
            "min_rho_boundary": float(rho_b.min()) if count else None,
            "max_rho_interior": float(rho_i.max()) if count else None,
            "log_sqrt_delta": 0.5 * math.log(params.delta),
            "misorderings": misordered,
            "details": [{k: v for k, v in p.items() if k != "cocycle_norms"} for p in probes]}
