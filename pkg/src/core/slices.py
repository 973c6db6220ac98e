"""
Complex 2-plane slices of ℂ² sampled on a pixel grid.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class SliceSpec:
    """origin + s·axis_u + t·axis_v for s ∈ [-w/2, w/2], t ∈ [-h/2, h/2] (real parameters)."""
    origin: Tuple[complex, complex]
    axis_u: Tuple[complex, complex]
    axis_v: Tuple[complex, complex]
    extent: Tuple[float, float]
    resolution: Tuple[int, int]

    def __post_init__(self) -> None:
        for name in ("origin", "axis_u", "axis_v"):
            object.__setattr__(self, name, tuple(complex(c) for c in getattr(self, name)))
        object.__setattr__(self, "extent", (float(self.extent[0]), float(self.extent[1])))
        object.__setattr__(self, "resolution", (int(self.resolution[0]), int(self.resolution[1])))
        if self.resolution[0] < 16 or self.resolution[1] < 16:
            raise ValueError("resolution must be at least 16x16")
        u = np.array(self.axis_u)
        v = np.array(self.axis_v)
        # real-linear independence in ℝ⁴
        real_frame = np.array([np.concatenate([u.real, u.imag]), np.concatenate([v.real, v.imag])])
        if np.linalg.matrix_rank(real_frame, tol=1e-12) < 2:
            raise ValueError("slice axes must be linearly independent")

    @classmethod
    def complex_line(cls, origin: Sequence[complex], direction: Sequence[complex],
                     center: complex, extent: Tuple[float, float],
                     resolution: Tuple[int, int]) -> "SliceSpec":
        """The complex line origin + ζ·direction, ζ in a rectangle around ``center``."""
        d = np.asarray(direction, dtype=complex)
        o = np.asarray(origin, dtype=complex) + center * d
        return cls(tuple(o), tuple(d), tuple(1j * d), extent, resolution)

    def params(self) -> Tuple[np.ndarray, np.ndarray]:
        """Pixel-centre parameters (s along columns, t along rows, top row = largest t)."""
        width, height = self.extent
        px_w, px_h = self.resolution
        s = (np.arange(px_w) + 0.5) / px_w * width - width / 2
        t = height / 2 - (np.arange(px_h) + 0.5) / px_h * height
        return s, t

    def row_points(self, row: int) -> np.ndarray:
        """Points of one pixel row as a (2, px_w) array."""
        s, t = self.params()
        o = np.array(self.origin)[:, None]
        u = np.array(self.axis_u)[:, None]
        v = np.array(self.axis_v)[:, None]
        return o + u * s[None, :] + v * t[row]

    def points(self) -> np.ndarray:
        """All pixel points as a (2, px_h, px_w) array."""
        return np.stack([self.row_points(r) for r in range(self.resolution[1])], axis=1)

    def to_dict(self) -> dict:
        pair = lambda v: [[c.real, c.imag] for c in v]  # noqa: E731
        return {"origin": pair(self.origin), "axis_u": pair(self.axis_u),
                "axis_v": pair(self.axis_v), "extent": list(self.extent),
                "resolution": list(self.resolution)}
