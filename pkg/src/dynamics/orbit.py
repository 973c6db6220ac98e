"""
Orbit classification, the plurisubharmonic probe u_n = −Re(z_n)/n and the
Fubini–Study equicontinuity probe.

Escape is decided projectively. An orbit escapes when its norms keep growing
and the directions of its increments [Δz_n : Δw_n : 0] form a Cauchy sequence
on the line at infinity; when the norms diverge, [z_n : w_n : 1] has the same
limit. Norm blow-up alone is reported as Undetermined.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple
import logging
import math

import numpy as np

from config import settings
from src.core.henon import HenonMap, spectral_norm
from src.core.projective import ProjPoint, affine_to_homogeneous, fs_distance_batch
from src.core.slices import SliceSpec
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


class EscapeKind(Enum):
    BOUNDED = 0
    ESCAPES_TO = 1
    OSCILLATING = 2
    UNDETERMINED = 3


@dataclass(frozen=True)
class EscapeClass:
    kind: EscapeKind
    radius_bound: Optional[float] = None
    limit: Optional[ProjPoint] = None
    residual: Optional[float] = None
    inner_radius: Optional[float] = None
    outer_radius: Optional[float] = None
    witness: Optional[Tuple[int, int]] = None

    def to_dict(self) -> dict:
        out: dict = {"class": self.kind.name.lower()}
        if self.radius_bound is not None:
            out["radius_bound"] = self.radius_bound
        if self.limit is not None:
            out["limit"] = self.limit.to_list()
            out["residual"] = self.residual
        if self.witness is not None:
            out.update(inner_radius=self.inner_radius, outer_radius=self.outer_radius,
                       witness=list(self.witness))
        return out


@dataclass(frozen=True)
class OrbitRecord:
    points: np.ndarray  # (k+1, 2)
    proj: np.ndarray  # (k+1, 3) normalized homogeneous coordinates
    u: np.ndarray  # u_1..u_k
    cocycle_norms: np.ndarray  # ‖dF^0‖..‖dF^k‖
    escape: EscapeClass
    overflow: bool = False

    @property
    def kind(self) -> EscapeKind:
        return self.escape.kind


@dataclass(frozen=True)
class BatchClassification:
    """Vectorized classification of N orbits of equal length."""
    kind: np.ndarray  # EscapeKind values, int8
    escape_time: np.ndarray  # first k with norm > r_escape, else -1
    limit: np.ndarray  # (2, N) unit increment direction at the final step
    residual: np.ndarray
    max_norm: np.ndarray
    witness: np.ndarray  # (2, N): first exit beyond r_escape, first return within r_bound
    overflow: np.ndarray
    u_final: np.ndarray


def classify_orbits(orbits: np.ndarray, r_escape: float, r_bound: float,
                    tail_fraction: Optional[float] = None,
                    cauchy_tol: Optional[float] = None) -> BatchClassification:
    """Classify orbits stored as an (n+1, 2, N) array."""
    tail_fraction = settings.ORBIT_TAIL_FRACTION if tail_fraction is None else tail_fraction
    cauchy_tol = settings.ORBIT_CAUCHY_TOL if cauchy_tol is None else cauchy_tol
    n = orbits.shape[0] - 1
    count = orbits.shape[2]
    with np.errstate(all="ignore"):
        finite_steps = np.all(np.isfinite(orbits), axis=1)  # (n+1, N)
        finite = np.all(finite_steps, axis=0)
        norms = np.sqrt(np.abs(orbits[:, 0]) ** 2 + np.abs(orbits[:, 1]) ** 2)
        norms = np.where(finite_steps, norms, np.inf)
        max_norm = norms.max(axis=0)

        bounded = finite & (max_norm <= r_bound)

        above = norms > r_escape
        has_above = above.any(axis=0)
        first_above = np.where(has_above, above.argmax(axis=0), -1)
        index = np.arange(n + 1)[:, None]
        back = (norms <= r_bound) & (index > first_above[None, :]) & has_above[None, :]
        oscillating = finite & back.any(axis=0) & ~bounded
        first_back = np.where(back.any(axis=0), back.argmax(axis=0), -1)

        tail_len = min(n, max(2, int(math.ceil(tail_fraction * (n + 1)))))
        tail_norms = norms[n + 1 - tail_len:]
        increments = np.diff(orbits[n - tail_len:], axis=0)  # (tail_len, 2, N)
        inc_norm = np.sqrt(np.abs(increments[:, 0]) ** 2 + np.abs(increments[:, 1]) ** 2)
        growing = np.all(tail_norms > r_escape, axis=0) | (
            np.all(tail_norms > r_bound, axis=0)
            & (inc_norm[-1] > 0)
            & (inc_norm[-1] >= 0.5 * inc_norm[0])
            & (tail_norms[-1] > tail_norms[0])
        )

        last = increments[-1]
        limit_h = np.vstack([last, np.zeros((1, count), dtype=complex)])
        residual = np.zeros(count)
        for k in range(tail_len):
            step_h = np.vstack([increments[k], np.zeros((1, count), dtype=complex)])
            residual = np.maximum(residual, fs_distance_batch(step_h, limit_h))
        residual = np.where(np.isfinite(residual), residual, np.inf)

        escapes = finite & ~bounded & ~oscillating & growing & (residual < cauchy_tol)

        kind = np.full(count, EscapeKind.UNDETERMINED.value, dtype=np.int8)
        kind[escapes] = EscapeKind.ESCAPES_TO.value
        kind[oscillating] = EscapeKind.OSCILLATING.value
        kind[bounded] = EscapeKind.BOUNDED.value

        scale = np.max(np.abs(last), axis=0)
        limit = np.where(scale > 0, last / np.where(scale > 0, scale, 1.0), 0)

        u_final = np.where(finite, -orbits[n, 0].real / max(n, 1), np.nan)
    return BatchClassification(kind, first_above, limit, residual, max_norm,
                               np.vstack([first_above, first_back]), ~finite, u_final)


def classify(m: HenonMap, p: np.ndarray, n_max: int,
             r_escape: Optional[float] = None, r_bound: Optional[float] = None,
             with_cocycle: bool = True) -> OrbitRecord:
    """Classify the orbit of one point as Bounded, EscapesTo, Oscillating or Undetermined.

    Args:
        m: the map
        p: starting point of ℂ²
        n_max: number of iterates (at least 10)
        r_escape: escape radius (default from settings)
        r_bound: boundedness radius (default from settings)
        with_cocycle: also record the cocycle norms ‖dF^k(p)‖

    Returns:
        OrbitRecord with points, projective positions, u_n, cocycle norms and class
    """
    r_escape = settings.ORBIT_R_ESCAPE if r_escape is None else r_escape
    r_bound = settings.ORBIT_R_BOUND if r_bound is None else r_bound
    if not r_bound < r_escape:
        raise ValueError("r_bound must be smaller than r_escape")
    if n_max < 10:
        raise ValueError("n_max must be at least 10")

    orbit = m.iterate(p, n_max)
    points = orbit.points
    proj = _normalized_proj(points)
    steps = np.arange(1, len(points))
    u = -points[1:, 0].real / steps
    norms = m.cocycle_norms(p, orbit.steps) if with_cocycle else np.empty(0)

    if orbit.overflow:
        escape = EscapeClass(EscapeKind.UNDETERMINED)
    else:
        batch = classify_orbits(points[:, :, None], r_escape, r_bound)
        escape = _escape_class(batch, r_escape, r_bound)
    return OrbitRecord(points, proj, u, norms, escape, orbit.overflow)


def _escape_class(batch: BatchClassification, r_escape: float, r_bound: float) -> EscapeClass:
    kind = EscapeKind(int(batch.kind[0]))
    if kind is EscapeKind.BOUNDED:
        return EscapeClass(kind, radius_bound=float(batch.max_norm[0]))
    if kind is EscapeKind.ESCAPES_TO:
        direction = batch.limit[:, 0]
        limit = ProjPoint.of(direction[0], direction[1], 0).normalized()
        return EscapeClass(kind, limit=limit, residual=float(batch.residual[0]))
    if kind is EscapeKind.OSCILLATING:
        witness = (int(batch.witness[0, 0]), int(batch.witness[1, 0]))
        return EscapeClass(kind, inner_radius=r_bound, outer_radius=r_escape, witness=witness)
    return EscapeClass(kind)


def _normalized_proj(points: np.ndarray) -> np.ndarray:
    homog = affine_to_homogeneous(points.T)  # (3, k+1)
    with np.errstate(all="ignore"):
        pivot = np.argmax(np.abs(homog), axis=0)
        scale = homog[pivot, np.arange(homog.shape[1])]
        return (homog / scale).T


def escape_direction(record: OrbitRecord) -> Optional[float]:
    """arg(lim z/w) for escaping orbits."""
    if record.kind is not EscapeKind.ESCAPES_TO or record.escape.limit is None:
        return None
    x, y, _ = record.escape.limit.coords
    if y == 0:
        return 0.0
    return float(np.angle(x / y))


@dataclass(frozen=True)
class PshField:
    u: np.ndarray  # (rows, cols), NaN where the orbit overflowed
    overflow: np.ndarray
    n: int

    def to_rows(self, slice_spec: SliceSpec) -> List[dict]:
        s, t = slice_spec.params()
        rows = []
        for r in range(self.u.shape[0]):
            for c in range(self.u.shape[1]):
                rows.append({"s": float(s[c]), "t": float(t[r]),
                             "u": None if self.overflow[r, c] else float(self.u[r, c]),
                             "overflow": bool(self.overflow[r, c])})
        return rows


def _psh_row(task: Tuple[HenonMap, np.ndarray, int]) -> Tuple[np.ndarray, np.ndarray]:
    m, points, n = task
    orbits = m.iterate_batch(points, n)
    with np.errstate(all="ignore"):
        finite = np.all(np.isfinite(orbits), axis=(0, 1))
        u = np.where(finite, -orbits[n, 0].real / n, np.nan)
    return u, ~finite


def psh_probe(m: HenonMap, grid: SliceSpec, n: int, workers: Optional[int] = None) -> PshField:
    """u_n = −Re(z_n)/n on every node of a slice grid."""
    if n < 1:
        raise ValueError("n must be at least 1")
    tasks = [(m, grid.row_points(r), n) for r in range(grid.resolution[1])]
    rows = ordered_map(_psh_row, tasks, workers)
    u = np.vstack([row[0] for row in rows])
    overflow = np.vstack([row[1] for row in rows])
    logger.info("psh probe done", extra={"nodes": int(u.size), "overflowed": int(overflow.sum())})
    return PshField(u, overflow, n)


def ball_samples(p: np.ndarray, radius: float, count: int, seed: int = 0) -> np.ndarray:
    """Uniform samples of the ball B(p, radius) ⊂ ℂ² as a (2, count) array."""
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((4, count))
    gauss /= np.linalg.norm(gauss, axis=0)
    radii = radius * rng.random(count) ** 0.25
    offsets = (gauss[:2] + 1j * gauss[2:]) * radii
    return np.asarray(p, dtype=complex)[:, None] + offsets


def equicontinuity_profile(m: HenonMap, p: np.ndarray, ball_radius: float,
                           sample_count: int, n: int, seed: int = 0) -> np.ndarray:
    """max_q fs_distance([F^k q], [F^k p]) for k = 0..n.

    A heuristic normality indicator: values staying small suggest the Fatou
    set, growth to O(1) suggests Julia-set proximity. Overflowed samples
    count as maximally separated (π/2).
    """
    if ball_radius < 0:
        raise ValueError("ball_radius must be non-negative")
    if ball_radius == 0 or sample_count == 0:
        return np.zeros(n + 1)
    samples = ball_samples(p, ball_radius, sample_count, seed)
    centre = m.iterate_batch(np.asarray(p, dtype=complex)[:, None], n)
    orbits = m.iterate_batch(samples, n)
    profile = np.empty(n + 1)
    for k in range(n + 1):
        dist = fs_distance_batch(affine_to_homogeneous(orbits[k]),
                                 np.repeat(affine_to_homogeneous(centre[k]), sample_count, axis=1))
        dist = np.where(np.isfinite(dist), dist, np.pi / 2)
        profile[k] = float(dist.max())
    return profile


def equicontinuity_probe(m: HenonMap, p: np.ndarray, ball_radius: float,
                         sample_count: int, n: int, seed: int = 0) -> float:
    """Heuristic normality probe at iterate n (see ``equicontinuity_profile``)."""
    return float(equicontinuity_profile(m, p, ball_radius, sample_count, n, seed)[-1])


def fit_log_slope(norms: np.ndarray) -> float:
    ks = np.arange(len(norms))
    half = len(norms) // 2
    with np.errstate(all="ignore"):
        logs = np.log(norms[half:])
    mask = np.isfinite(logs)
    if mask.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(ks[half:][mask], logs[mask], 1)
    return float(slope)


def batch_spectral_norms(m: np.ndarray) -> np.ndarray:
    """Spectral norms of an (N, 2, 2) stack."""
    frob2 = np.sum(np.abs(m) ** 2, axis=(1, 2))
    det = np.abs(m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0])
    disc = np.maximum(frob2 * frob2 - 4.0 * det * det, 0.0)
    return np.sqrt((frob2 + np.sqrt(disc)) / 2.0)


__all__ = [
    "EscapeKind", "EscapeClass", "OrbitRecord", "BatchClassification", "classify_orbits",
    "classify", "escape_direction", "PshField", "psh_probe", "ball_samples",
    "equicontinuity_profile", "equicontinuity_probe", "fit_log_slope",
    "batch_spectral_norms", "spectral_norm",
]
