"""
Period-1 and period-2 points of standard-form maps by Newton's method on
the reduced one-variable equations

    fixed points:    f(z) − (1+δ)z = 0,               point (z, z)
    period two:      g(g(z)) − z = 0,  g = f/(1+δ),   point (z, g(z))
    period two, δ=−1: pairs of zeros of f,             point (z0, z1)

Completeness over the search box is empirical: roots are collected from a
grid of starting points and deduplicated.
"""
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple
import logging

import numpy as np

from config import settings
from src.core.expr import Const, Expr, Var, cancel_linear, mul, substitute
from src.core.henon import HenonMap, eigenvalues
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]  # re_min, re_max, im_min, im_max
AMBIGUITY_TOL = 1e-6


@dataclass(frozen=True)
class PeriodicPoint:
    point: Tuple[complex, complex]
    period: int
    newton_residual: float
    multipliers: Optional[Tuple[complex, complex]] = None
    label: Optional[str] = None
    indifferent_ambiguous: bool = False
    det_residual: Optional[float] = None
    trace_residual: Optional[float] = None

    def to_dict(self) -> dict:
        pair = lambda v: [[c.real, c.imag] for c in v]  # noqa: E731
        out = {"point": pair(self.point), "period": self.period,
               "newton_residual": self.newton_residual, "label": self.label,
               "indifferent_ambiguous": self.indifferent_ambiguous}
        if self.multipliers is not None:
            out["multipliers"] = pair(self.multipliers)
            out["multiplier_moduli"] = [abs(c) for c in self.multipliers]
        if self.det_residual is not None:
            out["det_residual"] = self.det_residual
            out["trace_residual"] = self.trace_residual
        return out


def start_grid(box: Box, starts: int) -> np.ndarray:
    """``starts × starts`` grid of complex starting points covering the box."""
    re = np.linspace(box[0], box[1], starts)
    im = np.linspace(box[2], box[3], starts)
    return (re[None, :] + 1j * im[:, None]).ravel()


def _in_box(z: np.ndarray, box: Box, slack: float = 1e-9) -> np.ndarray:
    return ((z.real >= box[0] - slack) & (z.real <= box[1] + slack)
            & (z.imag >= box[2] - slack) & (z.imag <= box[3] + slack))


def _newton_chunk(task: Tuple[Expr, Expr, np.ndarray, int, float]) -> Tuple[np.ndarray, np.ndarray]:
    func, dfunc, z, max_iter, divergence = task
    z = z.astype(complex).copy()
    active = np.ones(z.shape, dtype=bool)
    converged = np.zeros(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            if not active.any():
                break
            za = z[active]
            step = func(za) / dfunc(za)
            za = za - step
            z[active] = za
            done = np.abs(step) < 1e-10 * np.maximum(1.0, np.abs(za))
            lost = ~np.isfinite(za) | (np.abs(za) > divergence)
            idx = np.flatnonzero(active)
            converged[idx[done & ~lost]] = True
            active[idx[done | lost]] = False
        # polish
        for _ in range(2):
            zc = z[converged]
            z[converged] = zc - func(zc) / dfunc(zc)
        residual = np.abs(func(z))
    ok = converged & np.isfinite(z) & np.isfinite(residual)
    return z[ok], residual[ok]


def newton_roots(func: Expr, dfunc: Expr, box: Box, starts: int, tol: float,
                 workers: Optional[int] = None,
                 scale: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> List[Tuple[complex, float]]:
    """Deduplicated roots of ``func`` inside the box with residual below ``tol``.

    With ``scale`` the residual is |func| / max(1, scale), the size of the
    terms whose difference ``func`` is.
    """
    grid = start_grid(box, starts)
    chunk = max(1, len(grid) // max(1, 4 * (workers or 1)))
    tasks = [(func, dfunc, grid[i:i + chunk], settings.NEWTON_MAX_ITER, settings.NEWTON_DIVERGENCE)
             for i in range(0, len(grid), chunk)]
    results = ordered_map(_newton_chunk, tasks, workers)
    roots = np.concatenate([r[0] for r in results]) if results else np.empty(0, complex)
    residuals = np.concatenate([r[1] for r in results]) if results else np.empty(0)
    if scale is not None and len(roots):
        with np.errstate(all="ignore"):
            residuals = residuals / np.maximum(1.0, scale(roots))
    keep = _in_box(roots, box) & (residuals < tol)
    return dedup(roots[keep], residuals[keep])


def dedup(roots: np.ndarray, residuals: np.ndarray,
          radius: Optional[float] = None) -> List[Tuple[complex, float]]:
    """Greedy clustering at ``radius``; the smallest residual represents a cluster."""
    radius = settings.NEWTON_DEDUP_RADIUS if radius is None else radius
    order = np.lexsort((residuals, roots.imag, roots.real))
    unique: List[Tuple[complex, float]] = []
    for i in order:
        z = complex(roots[i])
        for j, (u, res) in enumerate(unique):
            if abs(z - u) < radius:
                if residuals[i] < res:
                    unique[j] = (z, float(residuals[i]))
                break
        else:
            unique.append((z, float(residuals[i])))
    unique.sort(key=lambda item: (round(item[0].real, 6), round(item[0].imag, 6)))
    return unique


def _require_standard(m: HenonMap) -> None:
    if m.form != "standard":
        raise ValueError("periodic solvers work on standard-form maps")


def fixed_points(m: HenonMap, box: Box, starts: int = 41, tol: float = 1e-9,
                 workers: Optional[int] = None) -> List[PeriodicPoint]:
    """Fixed points (z, z) with f(z) = (1+δ)z inside the box.

    Linear terms of f − (1+δ)z cancel symbolically before Newton runs, so
    e^{−z} + 2z with δ = 1 is solved as e^{−z} = 0 and has no roots.
    """
    _require_standard(m)
    lam = 1 + m.delta
    h = cancel_linear(m.f - Const(lam) * Var())
    roots = newton_roots(h, h.deriv(), box, starts, tol, workers,
                         scale=lambda z: np.abs(m.f(z)) + np.abs(lam * z))
    found = [PeriodicPoint((z, z), 1, res) for z, res in roots]
    logger.info("fixed points", extra={"count": len(found), "starts": starts * starts})
    return [classify_cycle(m, pp) for pp in found]


def period2_points(m: HenonMap, box: Box, starts: int = 41, tol: float = 1e-9,
                   workers: Optional[int] = None) -> List[PeriodicPoint]:
    """Period-2 points (z0, z1) with z1 = g(z0), or pairs of zeros of f when δ = −1.

    Both coordinates lie in the box.
    """
    _require_standard(m)
    delta = m.delta
    found: List[PeriodicPoint] = []
    if abs(1 + delta) < 1e-14:
        zeros = newton_roots(m.f, m.fprime, box, starts, tol, workers)
        for z0, r0 in zeros:
            for z1, r1 in zeros:
                if abs(z0 - z1) >= settings.NEWTON_DEDUP_RADIUS:
                    found.append(PeriodicPoint((z0, z1), 2, max(r0, r1)))
    else:
        g = mul(Const(1 / (1 + delta)), m.f)
        gg = substitute(g, g)
        phi = cancel_linear(gg - Var())
        roots = newton_roots(phi, phi.deriv(), box, starts, tol, workers,
                             scale=lambda z: np.abs(gg(z)) + np.abs(z))
        for z0, res in roots:
            z1 = complex(g(z0))
            if abs(z1 - z0) < settings.NEWTON_DEDUP_RADIUS:
                continue  # period one
            if not _in_box(np.array([z1]), box)[0]:
                continue
            found.append(PeriodicPoint((z0, z1), 2, res))
    logger.info("period-2 points", extra={"count": len(found), "delta": str(delta)})
    return [classify_cycle(m, pp) for pp in found]


def classify_cycle(m: HenonMap, pp: PeriodicPoint) -> PeriodicPoint:
    """Fill multipliers and label from dF^period along the cycle."""
    p = np.array(pp.point, dtype=complex)
    matrix = np.eye(2, dtype=complex)
    for _ in range(pp.period):
        matrix = m.differential(p) @ matrix
        p = m.apply(p)
    mults = eigenvalues(matrix)
    moduli = sorted(abs(c) for c in mults)
    ambiguous = any(abs(r - 1) < AMBIGUITY_TOL for r in moduli)
    if ambiguous:
        label = "indifferent"
    elif moduli[1] < 1:
        label = "attracting"
    elif moduli[0] > 1:
        label = "repelling"
    else:
        label = "saddle"
    det_res = trace_res = None
    if pp.period == 2 and m.form == "standard":
        z0, z1 = pp.point
        det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
        det_res = float(abs(det - m.delta ** 2))
        expected_trace = complex(m.fprime(z1)) * complex(m.fprime(z0)) - 2 * m.delta
        trace_res = float(abs(matrix[0, 0] + matrix[1, 1] - expected_trace))
    return replace(pp, multipliers=mults, label=label, indifferent_ambiguous=ambiguous,
                   det_residual=det_res, trace_residual=trace_res)


def saddle_period2(m: HenonMap, box: Box, starts: int = 41, tol: float = 1e-9,
                   threshold: float = 10.0, workers: Optional[int] = None) -> List[PeriodicPoint]:
    """Period-2 saddles with |f'(z1)·f'(z0)| above ``threshold``."""
    out = []
    for pp in period2_points(m, box, starts, tol, workers):
        z0, z1 = pp.point
        if abs(complex(m.fprime(z1)) * complex(m.fprime(z0))) > threshold and pp.label == "saddle":
            out.append(pp)
    return out


def periodicity_residual(m: HenonMap, pp: PeriodicPoint) -> float:
    """‖F^period(p) − p‖."""
    p = np.array(pp.point, dtype=complex)
    q = p
    for _ in range(pp.period):
        q = m.apply(q)
    return float(np.linalg.norm(q - p))

