"""
Transcendental Hénon maps in standard form (f(z) − δw, z) and alternative
form (f(z) + aw, az).

Points are numpy complex arrays whose first axis has length 2, so the same
call handles one point of shape (2,) or a batch of shape (2, N).
"""
from dataclasses import dataclass
from functools import cached_property
from typing import List, Literal, Tuple
import logging

import numpy as np

from src.core.expr import Expr
from src.core.parser import parse_expr

logger = logging.getLogger(__name__)

Form = Literal["standard", "alternative"]


@dataclass(frozen=True)
class Orbit:
    """Points F^0(p), ..., F^k(p) with k ≤ n; overflow marks an early stop."""
    points: np.ndarray  # shape (k+1, 2)
    overflow: bool

    @property
    def steps(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True)
class HenonMap:
    f: Expr
    form: Form = "standard"
    param: complex = 1.0  # δ for the standard form, a for the alternative form

    def __post_init__(self) -> None:
        object.__setattr__(self, "param", complex(self.param))
        if self.param == 0:
            raise ValueError(f"{self.form} form needs a nonzero parameter")
        if self.form not in ("standard", "alternative"):
            raise ValueError(f"unknown form {self.form!r}")

    @classmethod
    def standard(cls, f: "Expr | str", delta: complex) -> "HenonMap":
        return cls(parse_expr(f) if isinstance(f, str) else f, "standard", delta)

    @classmethod
    def alternative(cls, f: "Expr | str", a: complex) -> "HenonMap":
        return cls(parse_expr(f) if isinstance(f, str) else f, "alternative", a)

    @cached_property
    def fprime(self) -> Expr:
        return self.f.deriv()

    @property
    def delta(self) -> complex:
        if self.form != "standard":
            raise AttributeError("alternative form has no delta")
        return self.param

    @property
    def a(self) -> complex:
        if self.form != "alternative":
            raise AttributeError("standard form has no a")
        return self.param

    @property
    def jacobian(self) -> complex:
        """Constant determinant of the differential."""
        return self.param if self.form == "standard" else -self.param ** 2

    def apply(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=complex)
        z, w = p[0], p[1]
        with np.errstate(all="ignore"):
            fz = self.f(z)
            if self.form == "standard":
                return np.stack([fz - self.param * w, z])
            return np.stack([fz + self.param * w, self.param * z])

    def apply_flagged(self, p: np.ndarray) -> Tuple[np.ndarray, bool]:
        image = self.apply(p)
        return image, not bool(np.all(np.isfinite(image)))

    def apply_inverse(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=complex)
        z, w = p[0], p[1]
        with np.errstate(all="ignore"):
            if self.form == "standard":
                return np.stack([w, (self.f(w) - z) / self.param])
            u = w / self.param
            return np.stack([u, (z - self.f(u)) / self.param])

    def differential(self, p: np.ndarray) -> np.ndarray:
        """Jacobian matrix; shape (2, 2) for one point, (N, 2, 2) for a batch."""
        p = np.asarray(p, dtype=complex)
        with np.errstate(all="ignore"):
            fp = np.asarray(self.fprime(p[0]), dtype=complex)
        m = np.zeros(fp.shape + (2, 2), dtype=complex)
        m[..., 0, 0] = fp
        if self.form == "standard":
            m[..., 0, 1] = -self.param
            m[..., 1, 0] = 1.0
        else:
            m[..., 0, 1] = self.param
            m[..., 1, 0] = self.param
        return m

    def iterate(self, p: np.ndarray, n: int) -> Orbit:
        """Orbit of one point; stops early when a coordinate stops being finite."""
        if n < 0:
            raise ValueError("n must be non-negative")
        points = np.empty((n + 1, 2), dtype=complex)
        points[0] = np.asarray(p, dtype=complex)
        for k in range(n):
            image, overflow = self.apply_flagged(points[k])
            if overflow:
                return Orbit(points[:k + 1].copy(), True)
            points[k + 1] = image
        return Orbit(points, False)

    def iterate_batch(self, p: np.ndarray, n: int) -> np.ndarray:
        """Orbits of a (2, N) batch as an (n+1, 2, N) array; non-finite values stay in place."""
        p = np.asarray(p, dtype=complex)
        out = np.empty((n + 1,) + p.shape, dtype=complex)
        out[0] = p
        for k in range(n):
            out[k + 1] = self.apply(out[k])
        return out

    def cocycle(self, p: np.ndarray, n: int) -> List[np.ndarray]:
        """Partial products dF^0 = I, dF^1, ..., dF^k along the orbit of p."""
        orbit = self.iterate(p, n)
        products = [np.eye(2, dtype=complex)]
        for point in orbit.points[:-1]:
            products.append(self.differential(point) @ products[-1])
        return products

    def cocycle_norms(self, p: np.ndarray, n: int) -> np.ndarray:
        return np.array([spectral_norm(m) for m in self.cocycle(p, n)])

    def to_alternative(self) -> Tuple["HenonMap", np.ndarray]:
        """Conjugate a standard map to (f(z) + aw, az) with a = √(−δ).

        Returns the new map and C = diag(1, a), with C∘F∘C⁻¹ the new map.
        """
        if self.form != "standard":
            return self, np.eye(2, dtype=complex)
        a = np.sqrt(-self.param)
        return HenonMap(self.f, "alternative", a), np.diag([1.0, a]).astype(complex)

    def to_standard(self) -> Tuple["HenonMap", np.ndarray]:
        """Conjugate an alternative map to (f(z) − δw, z) with δ = −a²."""
        if self.form != "alternative":
            return self, np.eye(2, dtype=complex)
        a = self.param
        return HenonMap(self.f, "standard", -a * a), np.diag([1.0, 1.0 / a]).astype(complex)

    def describe(self) -> dict:
        key = "delta" if self.form == "standard" else "a"
        return {"form": self.form, key: [self.param.real, self.param.imag], "f": self.f.to_text()}

    def translated(self, shift: Tuple[complex, complex]) -> "TranslatedHenonMap":
        """The map p ↦ F(p) − shift."""
        return TranslatedHenonMap(self.f, self.form, self.param, tuple(shift))


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value of a 2×2 matrix in closed form."""
    frob2 = float(np.sum(np.abs(m) ** 2))
    det = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = max(frob2 * frob2 - 4.0 * det * det, 0.0)
    return float(np.sqrt((frob2 + np.sqrt(disc)) / 2.0))


def eigenvalues(m: np.ndarray) -> Tuple[complex, complex]:
    """Eigenvalues of a 2×2 matrix, ordered by increasing modulus."""
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    root = np.sqrt(tr * tr / 4.0 - det + 0j)
    big = max(complex(tr / 2.0 - root), complex(tr / 2.0 + root), key=abs)
    if big == 0:
        return 0j, 0j
    # small root via det = λ1·λ2
    return complex(det / big), big


@dataclass(frozen=True)
class TranslatedHenonMap(HenonMap):
    """F − shift; the differential is that of F."""
    shift: Tuple[complex, complex] = (0j, 0j)

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "shift", tuple(complex(c) for c in self.shift))

    def _shift_like(self, p: np.ndarray) -> np.ndarray:
        return np.array(self.shift).reshape((2,) + (1,) * (p.ndim - 1))

    def apply(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=complex)
        return super().apply(p) - self._shift_like(p)

    def apply_inverse(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=complex)
        return super().apply_inverse(p + self._shift_like(p))

    def _conjugate(self, target: str) -> Tuple["HenonMap", np.ndarray]:
        # C∘(F − s)∘C⁻¹ = C∘F∘C⁻¹ − Cs
        base = HenonMap(self.f, self.form, self.param)
        image, c = base.to_alternative() if target == "alternative" else base.to_standard()
        return image.translated(tuple(c @ np.array(self.shift))), c

    def to_alternative(self) -> Tuple["HenonMap", np.ndarray]:
        return self._conjugate("alternative")

    def to_standard(self) -> Tuple["HenonMap", np.ndarray]:
        return self._conjugate("standard")

    def describe(self) -> dict:
        out = super().describe()
        out["shift"] = [[c.real, c.imag] for c in self.shift]
        return out
