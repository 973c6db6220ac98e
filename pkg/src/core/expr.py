"""
Entire functions of one complex variable as immutable expression trees.

Every node evaluates on scalars and on numpy arrays alike and has an exact
symbolic derivative. ``Poly`` is a compact node for Σ c_k (z/s)^k; it is
closed under differentiation and expands into Add/Mul/IntPow on request.
``NewtonPoly`` holds the same kind of polynomial in a Newton basis on
well-spread nodes, which stays accurate at high degree.
"""
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple, Union
import logging

import numpy as np
from numpy.polynomial import polynomial as npoly

logger = logging.getLogger(__name__)

Number = Union[complex, np.ndarray]


@dataclass(frozen=True)
class Evaluation:
    """Value of an expression plus the overflow flag."""
    value: Number
    overflow: bool


class Expr:
    """Base node. Subclasses implement ``_value``, ``deriv`` and ``to_text``."""

    def __call__(self, z: Number) -> Number:
        with np.errstate(all="ignore"):
            return self._value(z)

    def _value(self, z: Number) -> Number:
        raise NotImplementedError

    def deriv(self) -> "Expr":
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def __add__(self, other: "ExprLike") -> "Expr":
        return add(self, as_expr(other))

    def __radd__(self, other: "ExprLike") -> "Expr":
        return add(as_expr(other), self)

    def __sub__(self, other: "ExprLike") -> "Expr":
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other: "ExprLike") -> "Expr":
        return add(as_expr(other), neg(self))

    def __mul__(self, other: "ExprLike") -> "Expr":
        return mul(self, as_expr(other))

    def __rmul__(self, other: "ExprLike") -> "Expr":
        return mul(as_expr(other), self)

    def __neg__(self) -> "Expr":
        return neg(self)

    def __str__(self) -> str:
        return self.to_text()


ExprLike = Union[Expr, complex, float, int]


@dataclass(frozen=True)
class Var(Expr):
    def _value(self, z: Number) -> Number:
        return z

    def deriv(self) -> Expr:
        return Const(1.0)

    def to_text(self) -> str:
        return "z"


@dataclass(frozen=True)
class Const(Expr):
    value: complex = 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", complex(self.value))

    def _value(self, z: Number) -> Number:
        if isinstance(z, np.ndarray):
            return np.full(z.shape, self.value, dtype=complex)
        return self.value

    def deriv(self) -> Expr:
        return Const(0.0)

    def to_text(self) -> str:
        return format_complex(self.value)


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def _value(self, z: Number) -> Number:
        return self.left._value(z) + self.right._value(z)

    def deriv(self) -> Expr:
        return add(self.left.deriv(), self.right.deriv())

    def to_text(self) -> str:
        return f"{self.left.to_text()} + {self.right.to_text()}"


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def _value(self, z: Number) -> Number:
        return self.left._value(z) * self.right._value(z)

    def deriv(self) -> Expr:
        return add(mul(self.left.deriv(), self.right), mul(self.left, self.right.deriv()))

    def to_text(self) -> str:
        return f"({self.left.to_text()})*({self.right.to_text()})"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def _value(self, z: Number) -> Number:
        return -self.arg._value(z)

    def deriv(self) -> Expr:
        return neg(self.arg.deriv())

    def to_text(self) -> str:
        return f"-({self.arg.to_text()})"


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def _value(self, z: Number) -> Number:
        return np.exp(self.arg._value(z))

    def deriv(self) -> Expr:
        return mul(self, self.arg.deriv())

    def to_text(self) -> str:
        return f"exp({self.arg.to_text()})"


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr

    def _value(self, z: Number) -> Number:
        return np.sin(self.arg._value(z))

    def deriv(self) -> Expr:
        return mul(Cos(self.arg), self.arg.deriv())

    def to_text(self) -> str:
        return f"sin({self.arg.to_text()})"


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr

    def _value(self, z: Number) -> Number:
        return np.cos(self.arg._value(z))

    def deriv(self) -> Expr:
        return mul(neg(Sin(self.arg)), self.arg.deriv())

    def to_text(self) -> str:
        return f"cos({self.arg.to_text()})"


@dataclass(frozen=True)
class IntPow(Expr):
    arg: Expr
    power: int = 1

    def __post_init__(self) -> None:
        if self.power < 0:
            raise ValueError("IntPow needs a non-negative exponent")

    def _value(self, z: Number) -> Number:
        base = self.arg._value(z)
        if self.power == 0:
            return base ** 0 if isinstance(base, np.ndarray) else 1 + 0j
        return base ** self.power

    def deriv(self) -> Expr:
        if self.power == 0:
            return Const(0.0)
        return mul(mul(Const(self.power), intpow(self.arg, self.power - 1)), self.arg.deriv())

    def to_text(self) -> str:
        return f"({self.arg.to_text()})^{self.power}"


@dataclass(frozen=True)
class Poly(Expr):
    """Σ coeffs[k] · ((z − center)/scale)^k, evaluated by Horner's rule."""
    coeffs: Tuple[complex, ...] = field(default=(0j,))
    scale: float = 1.0
    center: complex = 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs) or (0j,))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "center", complex(self.center))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _value(self, z: Number) -> Number:
        result = npoly.polyval((np.asarray(z) - self.center) / self.scale, np.asarray(self.coeffs))
        if isinstance(z, np.ndarray):
            return np.asarray(result, dtype=complex)
        return complex(result)

    def deriv(self) -> Expr:
        if self.degree == 0:
            return Const(0.0)
        k = np.arange(1, len(self.coeffs))
        return Poly(tuple(np.asarray(self.coeffs[1:]) * k / self.scale), self.scale, self.center)

    def expand(self) -> Expr:
        """Rewrite in the Add/Mul/IntPow grammar."""
        u = mul(Const(1.0 / self.scale), add(Var(), Const(-self.center)))
        total: Expr = Const(self.coeffs[0])
        for k, c in enumerate(self.coeffs[1:], start=1):
            if c != 0:
                total = add(total, mul(Const(c), intpow(u, k)))
        return total

    def to_text(self) -> str:
        return self.expand().to_text()


@dataclass(frozen=True)
class NewtonPoly(Expr):
    """Σ coeffs[k] · ω_k(z/scale) with ω_0 = 1, ω_{k+1} = ω_k · (u − nodes[k]) / capacity.

    Nested evaluation costs O(degree) per point. A positive ``order``
    evaluates that derivative.
    """
    coeffs: Tuple[complex, ...] = field(default=(0j,))
    nodes: Tuple[complex, ...] = ()
    capacity: float = 1.0
    scale: float = 1.0
    order: int = 0

    def __post_init__(self) -> None:
        coeffs = tuple(complex(c) for c in self.coeffs) or (0j,)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "nodes", tuple(complex(x) for x in self.nodes))
        object.__setattr__(self, "capacity", float(self.capacity))
        object.__setattr__(self, "scale", float(self.scale))
        if len(self.nodes) < len(coeffs) - 1:
            raise ValueError("fewer nodes than the degree")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _value(self, z: Number) -> Number:
        u = np.asarray(z, dtype=complex) / self.scale
        acc = [np.full(u.shape, self.coeffs[-1], dtype=complex)]
        acc += [np.zeros(u.shape, dtype=complex) for _ in range(self.order)]
        for k in range(self.degree - 1, -1, -1):
            t = (u - self.nodes[k]) / self.capacity
            for j in range(self.order, 0, -1):
                acc[j] = acc[j] * t + j * acc[j - 1] / self.capacity
            acc[0] = acc[0] * t + self.coeffs[k]
        result = acc[self.order] / self.scale ** self.order
        if isinstance(z, np.ndarray):
            return np.asarray(result, dtype=complex)
        return complex(result)

    def deriv(self) -> Expr:
        return NewtonPoly(self.coeffs, self.nodes, self.capacity, self.scale, self.order + 1)

    def monomial(self) -> Poly:
        """Monomial coefficients in z/scale; exact in exact arithmetic only."""
        mono = np.zeros(self.degree + 1, dtype=complex)
        mono[0] = self.coeffs[-1]
        for k in range(self.degree - 1, -1, -1):
            shifted = np.concatenate([[0j], mono[:-1]]) - self.nodes[k] * mono
            mono = shifted / self.capacity
            mono[0] += self.coeffs[k]
        if self.order:
            mono = npoly.polyder(mono, self.order) / self.scale ** self.order
        return Poly(tuple(np.atleast_1d(mono)), self.scale, 0j)

    def expand(self) -> Expr:
        return self.monomial().expand()

    def to_text(self) -> str:
        return self.expand().to_text()


def as_expr(value: ExprLike) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(complex(value))


def add(left: Expr, right: Expr) -> Expr:
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(left.value + right.value)
    if isinstance(left, Const) and left.value == 0:
        return right
    if isinstance(right, Const) and right.value == 0:
        return left
    return Add(left, right)


def mul(left: Expr, right: Expr) -> Expr:
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(left.value * right.value)
    for a, b in ((left, right), (right, left)):
        if isinstance(a, Const):
            if a.value == 0:
                return Const(0.0)
            if a.value == 1:
                return b
    return Mul(left, right)


def neg(arg: Expr) -> Expr:
    if isinstance(arg, Const):
        return Const(-arg.value)
    if isinstance(arg, Neg):
        return arg.arg
    return Neg(arg)


def intpow(arg: Expr, power: int) -> Expr:
    if power == 0:
        return Const(1.0)
    if power == 1:
        return arg
    if isinstance(arg, Const):
        return Const(arg.value ** power)
    return IntPow(arg, power)


def evaluate(expr: Expr, z: Number) -> Evaluation:
    """Evaluate with the overflow flag set when any value is not finite."""
    value = expr(z)
    overflow = not bool(np.all(np.isfinite(value)))
    if overflow:
        logger.debug("expression overflow", extra={"expr": expr.to_text()[:80]})
    return Evaluation(value, overflow)


def deriv(expr: Expr) -> Expr:
    return expr.deriv()


def format_complex(value: complex) -> str:
    """Text form the parser reads back exactly."""
    if value.imag == 0:
        return repr(value.real)
    if value.real == 0:
        return f"{value.imag!r}j"
    sign = "+" if value.imag >= 0 else "-"
    return f"({value.real!r}{sign}{abs(value.imag)!r}j)"


def substitute(expr: Expr, inner: Expr) -> Expr:
    """Composition expr ∘ inner: every Var is replaced by ``inner``."""
    if isinstance(expr, Var):
        return inner
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Add):
        return add(substitute(expr.left, inner), substitute(expr.right, inner))
    if isinstance(expr, Mul):
        return mul(substitute(expr.left, inner), substitute(expr.right, inner))
    if isinstance(expr, Neg):
        return neg(substitute(expr.arg, inner))
    if isinstance(expr, (Exp, Sin, Cos)):
        return type(expr)(substitute(expr.arg, inner))
    if isinstance(expr, IntPow):
        return intpow(substitute(expr.arg, inner), expr.power)
    if isinstance(expr, (Poly, NewtonPoly)):
        return substitute(expr.expand(), inner)
    raise TypeError(f"unknown node {type(expr).__name__}")


def _terms(expr: Expr, scale: complex = 1.0) -> Iterator[Tuple[complex, Expr]]:
    """Flatten a sum into (coefficient, term) pairs, distributing constant factors."""
    if isinstance(expr, Add):
        yield from _terms(expr.left, scale)
        yield from _terms(expr.right, scale)
    elif isinstance(expr, Neg):
        yield from _terms(expr.arg, -scale)
    elif isinstance(expr, Mul) and isinstance(expr.left, Const):
        yield from _terms(expr.right, scale * expr.left.value)
    elif isinstance(expr, Mul) and isinstance(expr.right, Const):
        yield from _terms(expr.left, scale * expr.right.value)
    elif isinstance(expr, (Poly, NewtonPoly)):
        yield from _terms(expr.expand(), scale)
    else:
        yield scale, expr


def collect_affine(expr: Expr) -> Tuple[List[Tuple[complex, Expr]], complex, complex]:
    """Split ``expr`` into nonlinear terms, the coefficient of z and the constant.

    Coefficients that cancel to within rounding of the contributing terms
    are returned as exact zeros.
    """
    rest: List[Tuple[complex, Expr]] = []
    slope, slope_mass = 0j, 0.0
    intercept, intercept_mass = 0j, 0.0
    for c, term in _terms(expr):
        if c == 0:
            continue
        if isinstance(term, Var):
            slope += c
            slope_mass += abs(c)
        elif isinstance(term, Const):
            intercept += c * term.value
            intercept_mass += abs(c * term.value)
        else:
            rest.append((complex(c), term))
    if abs(slope) <= 1e-14 * slope_mass:
        slope = 0j
    if abs(intercept) <= 1e-14 * intercept_mass:
        intercept = 0j
    return rest, complex(slope), complex(intercept)


def cancel_linear(expr: Expr) -> Expr:
    """Equivalent expression with the linear and constant parts summed once."""
    rest, slope, intercept = collect_affine(expr)
    total: Expr = Const(intercept)
    for c, term in rest:
        total = add(total, mul(Const(c), term))
    return add(total, mul(Const(slope), Var()))
