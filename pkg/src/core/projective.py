"""
Points of the complex projective plane and the Fubini–Study distance.
"""
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """Homogeneous triple [x : y : t], not all zero."""
    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=complex).reshape(3)
        if not np.any(coords != 0):
            raise ValueError("projective point needs a nonzero coordinate")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, x: complex, y: complex, t: complex) -> "ProjPoint":
        return cls(np.array([x, y, t], dtype=complex))

    @classmethod
    def from_affine(cls, point: Sequence[complex]) -> "ProjPoint":
        """[z : w : 1] for a point (z, w) of ℂ²."""
        return cls(np.array([point[0], point[1], 1.0], dtype=complex))

    def normalized(self) -> "ProjPoint":
        """Representative whose max-modulus coordinate equals 1."""
        k = int(np.argmax(np.abs(self.coords)))
        return ProjPoint(self.coords / self.coords[k])

    @property
    def at_infinity(self) -> bool:
        normal = self.normalized().coords
        return abs(normal[2]) < 1e-12

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return fs_distance(self, other) < 1e-12

    def __hash__(self) -> int:
        return hash(tuple(np.round(self.normalized().coords, 12)))

    def to_list(self) -> list:
        return [[c.real, c.imag] for c in self.normalized().coords]


PointLike = Union[ProjPoint, np.ndarray, Sequence[complex]]


def _coords(p: PointLike) -> np.ndarray:
    if isinstance(p, ProjPoint):
        return p.coords
    return np.asarray(p, dtype=complex)


def fs_distance(p: PointLike, q: PointLike) -> float:
    """Fubini–Study distance arccos(|<p,q>| / (|p||q|)), valued in [0, π/2]."""
    return float(fs_distance_batch(_coords(p).reshape(3, 1), _coords(q).reshape(3, 1))[0])


def fs_distance_batch(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Column-wise distances for (3, N) arrays of homogeneous coordinates.

    Uses atan2(|p ∧ q|, |<p,q>|) instead of arccos, which keeps full
    precision for nearby points.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    scale_p = np.max(np.abs(p), axis=0)
    scale_q = np.max(np.abs(q), axis=0)
    with np.errstate(all="ignore"):
        p = p / scale_p
        q = q / scale_q
        inner = np.abs(np.sum(p * np.conj(q), axis=0))
        wedge = np.sqrt(
            np.abs(p[0] * q[1] - p[1] * q[0]) ** 2
            + np.abs(p[0] * q[2] - p[2] * q[0]) ** 2
            + np.abs(p[1] * q[2] - p[2] * q[1]) ** 2
        )
        return np.arctan2(wedge, inner)


def affine_to_homogeneous(points: np.ndarray) -> np.ndarray:
    """(2, N) affine points to (3, N) homogeneous [z : w : 1]."""
    points = np.asarray(points, dtype=complex)
    return np.vstack([points, np.ones((1,) + points.shape[1:], dtype=complex)])


LIMIT_BAKER = ProjPoint.of(1, 1, 0)
"""[1:1:0], the ℓ∞ point orbits of the Baker domain converge to."""
