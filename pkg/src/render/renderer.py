"""
Slice renderer: one orbit per pixel, colored by escape time, escaping
direction, psh value, basin index or cocycle growth.

Rows are rendered independently and reassembled by row index, so every
pixel depends only on its grid point and the output is the same for any
worker count. Output is binary PPM.
"""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union
import hashlib
import logging

import numpy as np

from config import settings
from src.core.henon import HenonMap
from src.core.slices import SliceSpec
from src.dynamics.orbit import EscapeKind, batch_spectral_norms, classify_orbits
from src.constructions.wander import basin_indices
from src.utils.performance_monitor import PerformanceMonitor
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

OVERFLOW_COLOR = (255, 0, 255)
BOUNDED_COLOR = (0, 0, 0)
UNDETERMINED_COLOR = (96, 96, 96)
OSCILLATING_COLOR = (255, 255, 255)
PSH_RANGE = (-2.0, 0.5)
GROWTH_RANGE = (-2.0, 2.0)
BASIN_PALETTE = np.array([
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60), (250, 190, 190),
    (0, 128, 128), (170, 110, 40),
], dtype=np.uint8)


class ColorMode(Enum):
    ESCAPE_TIME = "escape-time"
    ESCAPE_DIRECTION = "escape-direction"
    PSH_VALUE = "psh-value"
    BASIN_INDEX = "basin-index"
    COCYCLE_GROWTH = "cocycle-growth"


@dataclass(frozen=True)
class Thresholds:
    r_escape: float
    r_bound: float
    capture_radius: float = 0.2

    @classmethod
    def defaults(cls) -> "Thresholds":
        return cls(settings.ORBIT_R_ESCAPE, settings.ORBIT_R_BOUND)


@dataclass(frozen=True, eq=False)
class Image:
    pixels: np.ndarray  # (height, width, 3) uint8
    mode: ColorMode
    metrics: Dict[str, Any]

    def ppm_bytes(self) -> bytes:
        height, width, _ = self.pixels.shape
        return f"P6\n{width} {height}\n255\n".encode("ascii") + self.pixels.tobytes()

    def write_ppm(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_bytes(self.ppm_bytes())
        return path

    def row_checksums(self) -> List[str]:
        return [hashlib.sha256(row.tobytes()).hexdigest() for row in self.pixels]


def hue_to_rgb(hue: np.ndarray) -> np.ndarray:
    """Fully saturated colors on the hue wheel; hue in radians."""
    h = np.mod(hue, 2 * np.pi) / (2 * np.pi) * 6.0
    sector = np.floor(h).astype(int) % 6
    frac = h - np.floor(h)
    rising, falling = frac, 1.0 - frac
    one, zero = np.ones_like(h), np.zeros_like(h)
    table = [(one, rising, zero), (falling, one, zero), (zero, one, rising),
             (zero, falling, one), (rising, zero, one), (one, zero, falling)]
    rgb = np.zeros(h.shape + (3,))
    for s, channels in enumerate(table):
        mask = sector == s
        for c in range(3):
            rgb[mask, c] = channels[c][mask]
    return np.round(rgb * 255).astype(np.uint8)


def diverging(values: np.ndarray, bounds: Tuple[float, float]) -> np.ndarray:
    """Blue below zero, white at zero, red above; values clamped to bounds."""
    lo, hi = bounds
    v = np.clip(values, lo, hi)
    rgb = np.ones(v.shape + (3,))
    neg = v < 0
    pos = ~neg
    t_neg = np.where(neg, v / lo if lo else 0.0, 0.0)
    t_pos = np.where(pos, v / hi if hi else 0.0, 0.0)
    rgb[..., 0] -= t_neg
    rgb[..., 1] -= t_neg + t_pos
    rgb[..., 2] -= t_pos
    return np.round(np.clip(rgb, 0, 1) * 255).astype(np.uint8)


def _kind_colors(kind: np.ndarray) -> np.ndarray:
    out = np.empty(kind.shape + (3,), dtype=np.uint8)
    out[:] = UNDETERMINED_COLOR
    out[kind == EscapeKind.BOUNDED.value] = BOUNDED_COLOR
    out[kind == EscapeKind.OSCILLATING.value] = OSCILLATING_COLOR
    return out


def _escape_time(m: HenonMap, points: np.ndarray, n_max: int, th: Thresholds) -> np.ndarray:
    batch = classify_orbits(m.iterate_batch(points, n_max), th.r_escape, th.r_bound)
    out = _kind_colors(batch.kind)
    escaped = batch.escape_time >= 0
    level = 255 - np.round(200 * batch.escape_time / n_max).astype(int)
    out[escaped] = np.stack([level, level, np.full_like(level, 255)], axis=-1)[escaped]
    out[batch.overflow & ~escaped] = OVERFLOW_COLOR
    return out


def _escape_direction(m: HenonMap, points: np.ndarray, n_max: int, th: Thresholds) -> np.ndarray:
    batch = classify_orbits(m.iterate_batch(points, n_max), th.r_escape, th.r_bound)
    out = _kind_colors(batch.kind)
    escapes = batch.kind == EscapeKind.ESCAPES_TO.value
    with np.errstate(all="ignore"):
        x, y = batch.limit
        hue = np.where(y != 0, np.angle(x / np.where(y != 0, y, 1)), 0.0)
    out[escapes] = hue_to_rgb(hue)[escapes]
    out[batch.overflow] = OVERFLOW_COLOR
    return out


def _psh_value(m: HenonMap, points: np.ndarray, n_max: int, th: Thresholds) -> np.ndarray:
    orbits = m.iterate_batch(points, n_max)
    with np.errstate(all="ignore"):
        finite = np.all(np.isfinite(orbits), axis=(0, 1))
        u = np.where(finite, -orbits[n_max, 0].real / n_max, 0.0)
    out = diverging(u, PSH_RANGE)
    out[~finite] = OVERFLOW_COLOR
    return out


def _basin_index(m: HenonMap, points: np.ndarray, n_max: int, th: Thresholds) -> np.ndarray:
    index = basin_indices(m, points, n_max, th.capture_radius)
    uncaptured = index == np.iinfo(np.int64).min
    out = BASIN_PALETTE[np.mod(np.where(uncaptured, 0, index), len(BASIN_PALETTE))].copy()
    out[uncaptured] = BOUNDED_COLOR
    return out


def _cocycle_growth(m: HenonMap, points: np.ndarray, n_max: int, th: Thresholds) -> np.ndarray:
    orbits = m.iterate_batch(points, n_max)
    count = points.shape[1]
    product = np.broadcast_to(np.eye(2, dtype=complex), (count, 2, 2)).copy()
    logs = np.zeros((n_max + 1, count))
    with np.errstate(all="ignore"):
        for k in range(n_max):
            product = m.differential(orbits[k]) @ product
            logs[k + 1] = np.log(batch_spectral_norms(product))
        steps = np.arange(n_max + 1) - n_max / 2
        rho = (steps @ logs) / (steps @ steps)
    finite = np.isfinite(rho)
    out = diverging(np.where(finite, rho, 0.0), GROWTH_RANGE)
    out[~finite] = OVERFLOW_COLOR
    return out


_PAINTERS = {
    ColorMode.ESCAPE_TIME: _escape_time,
    ColorMode.ESCAPE_DIRECTION: _escape_direction,
    ColorMode.PSH_VALUE: _psh_value,
    ColorMode.BASIN_INDEX: _basin_index,
    ColorMode.COCYCLE_GROWTH: _cocycle_growth,
}


def _render_row(task: Tuple[HenonMap, np.ndarray, ColorMode, int, Thresholds]) -> np.ndarray:
    m, points, mode, n_max, th = task
    return _PAINTERS[mode](m, points, n_max, th)


def render(m: HenonMap, slice_spec: SliceSpec, mode: ColorMode, n_max: int = 100,
           thresholds: Optional[Thresholds] = None, workers: Optional[int] = None,
           monitor: Optional[PerformanceMonitor] = None) -> Image:
    """Render a slice; each pixel is a pure function of its grid point."""
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    th = thresholds or Thresholds.defaults()
    monitor = monitor or PerformanceMonitor()
    width, height = slice_spec.resolution
    tasks = [(m, slice_spec.row_points(r), mode, n_max, th) for r in range(height)]
    with monitor.track("render", items=width * height) as metrics:
        rows = ordered_map(_render_row, tasks, workers)
    pixels = np.stack(rows, axis=0).astype(np.uint8)
    report = {"mode": mode.value, "width": width, "height": height, "n_max": n_max,
              "duration": metrics.get("duration"), "pixel_orbits_per_s": metrics.get("throughput")}
    logger.info("render done", extra=report)
    return Image(pixels, mode, report)
