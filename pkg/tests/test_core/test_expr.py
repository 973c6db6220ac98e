"""
Tests for expression trees.
"""
import cmath

import numpy as np
import pytest

from src.core.expr import (Const, Cos, Exp, Neg, NewtonPoly, Poly, Sin, Var, add,
                           cancel_linear, collect_affine, evaluate, intpow, mul, substitute)
from src.core.parser import parse_expr


def random_expr(rng, depth):
    """Random tree over the grammar with leaves z and constants in the unit square."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.6:
            return Var()
        return Const(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
    kind = int(rng.integers(6))
    arg = random_expr(rng, depth - 1)
    if kind == 0:
        return add(arg, random_expr(rng, depth - 1))
    if kind == 1:
        return mul(arg, random_expr(rng, depth - 1))
    if kind == 5:
        return intpow(arg, int(rng.integers(2, 4)))
    return (Exp, Sin, Cos)[kind - 2](arg)


class TestEvaluation:
    def test_scalar_and_batch_agree(self):
        """Test that scalar and array evaluation share one result."""
        # Arrange
        f = parse_expr("exp(-z) + 2*z")
        z = np.array([0.3 + 0.1j, -1.0, 2j])

        # Act
        batch = f(z)
        scalars = [f(complex(v)) for v in z]

        # Assert
        assert np.allclose(batch, scalars, rtol=0, atol=1e-15)

    def test_overflow_is_a_flag(self):
        """Test that overflow sets the flag instead of raising."""
        result = evaluate(Exp(Var()), np.array([1.0, 1000.0]))

        assert result.overflow
        assert np.isfinite(result.value[0])

    def test_finite_values_clear_the_flag(self):
        """Test that finite values leave the flag unset."""
        assert not evaluate(Exp(Var()), 1.0).overflow


class TestDerivative:
    def test_baker_function_derivative(self):
        """Test the derivative of exp(-z) + 2z."""
        fprime = parse_expr("exp(-z) + 2*z").deriv()

        assert abs(fprime(0.0) - 1.0) < 1e-15
        assert abs(fprime(1.5) - (2 - cmath.exp(-1.5))) < 1e-14

    def test_sine_chain_rule(self):
        """Test d/dz sin(2πz) = 2π cos(2πz)."""
        fprime = parse_expr("sin(2*pi*z)").deriv()

        assert abs(fprime(0.25) - 2 * np.pi * np.cos(np.pi / 2)) < 1e-12
        assert abs(fprime(1.0) - 2 * np.pi) < 1e-12

    def test_constant_folding(self):
        """Test that constant subtrees fold."""
        assert add(Const(1), Const(2)) == Const(3)
        assert mul(Const(1), Var()) == Var()
        assert mul(Const(0), Var()) == Const(0)

    def test_matches_finite_differences_on_random_trees(self):
        """Test symbolic derivatives against a five-point stencil on random expressions."""
        # Arrange
        rng = np.random.default_rng(2024)
        h = 1e-3

        for _ in range(40):
            f = random_expr(rng, 3)
            fprime = f.deriv()
            z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))

            # Act
            stencil = (f(z - 2 * h) - 8 * f(z - h) + 8 * f(z + h) - f(z + 2 * h)) / (12 * h)

            # Assert
            scale = 1.0 + abs(f(z)) + abs(fprime(z))
            assert abs(complex(fprime(z)) - stencil) < 1e-6 * scale, f.to_text()


class TestPoly:
    def test_centered_and_scaled_evaluation(self):
        """Test Σ c_k ((z − c)/s)^k."""
        p = Poly((1.0, 2.0, 3.0), scale=2.0, center=1.0)
        u = (4.0 - 1.0) / 2.0

        assert abs(p(4.0) - (1 + 2 * u + 3 * u * u)) < 1e-14

    def test_derivative_keeps_the_frame(self):
        """Test the derivative of a centred polynomial."""
        p = Poly((0.0, 0.0, 1.0), scale=2.0, center=1.0)  # ((z − 1)/2)^2

        assert abs(p.deriv()(3.0) - 1.0) < 1e-14

    def test_expansion_matches(self):
        """Test that the Add/Mul expansion evaluates like the compact node."""
        p = Poly((1 - 1j, 0.5, 0.25j), scale=3.0, center=0.5j)
        z = np.linspace(-2, 2, 7) + 0.3j

        assert np.allclose(p.expand()(z), p(z), atol=1e-13)


@pytest.fixture
def newton_poly():
    # 1 + 2(u − 1)/2 + 3(u − 1)(u + 1)/4 with u = z/2
    return NewtonPoly((1.0, 2.0, 3.0), nodes=(1.0, -1.0), capacity=2.0, scale=2.0)


class TestNewtonPoly:
    def test_nested_evaluation(self, newton_poly):
        """Test Σ a_k ω_k against the product form."""
        z = 3.0 + 1j
        u = z / 2

        expected = 1 + 2 * (u - 1) / 2 + 3 * (u - 1) * (u + 1) / 4

        assert abs(newton_poly(z) - expected) < 1e-14

    def test_derivatives_match_the_monomial_form(self, newton_poly):
        """Test first and second derivatives against the converted polynomial."""
        z = np.linspace(-3, 3, 9) + 0.4j
        mono = newton_poly.monomial()

        assert np.allclose(newton_poly(z), mono(z), atol=1e-13)
        assert np.allclose(newton_poly.deriv()(z), mono.deriv()(z), atol=1e-13)
        assert np.allclose(newton_poly.deriv().deriv()(z), mono.deriv().deriv()(z), atol=1e-13)

    def test_derivative_matches_finite_differences(self):
        """Test a random Newton form against central differences."""
        rng = np.random.default_rng(7)
        coeffs = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        nodes = np.exp(2j * np.pi * rng.random(11))
        p = NewtonPoly(tuple(coeffs), tuple(nodes), capacity=1.0, scale=3.0)
        z, h = 0.7 - 0.4j, 1e-6

        numeric = (p(z + h) - p(z - h)) / (2 * h)

        assert abs(p.deriv()(z) - numeric) < 1e-6 * max(1.0, abs(numeric))

    def test_composition_expands(self, newton_poly):
        """Test that substitution works through the monomial expansion."""
        composed = substitute(newton_poly, parse_expr("z + 1"))

        assert abs(composed(0.5) - newton_poly(1.5)) < 1e-13


class TestSubstitute:
    def test_composition(self):
        """Test (f ∘ g)(z) = f(g(z))."""
        f = parse_expr("z*z + 1")
        g = parse_expr("exp(z)")

        assert abs(substitute(f, g)(0.5) - (cmath.exp(1.0) + 1)) < 1e-13


class TestCancelLinear:
    def test_baker_fixed_point_equation_reduces_to_exponential(self):
        """Test that e^{-z} + 2z − 2z collapses to e^{-z}."""
        # Arrange
        h = parse_expr("exp(-z) + 2*z") - Const(2.0) * Var()

        # Act
        reduced = cancel_linear(h)

        # Assert
        assert reduced == Exp(Neg(Var()))
        assert abs(reduced(40.0) - cmath.exp(-40.0)) < 1e-30

    def test_collects_slope_and_intercept(self):
        """Test coefficients gathered through negation, constant factors and polynomials."""
        # Arrange
        expr = add(mul(Const(3.0), parse_expr("sin(z) - z + 1")), Poly((2.0, 1.0, 1.0), scale=2.0))

        # Act
        rest, slope, intercept = collect_affine(expr)

        # Assert
        assert slope == pytest.approx(-3.0 + 0.5)
        assert intercept == pytest.approx(3.0 + 2.0)
        assert len(rest) == 2

    def test_value_is_unchanged(self):
        """Test that the rewritten expression evaluates like the original."""
        expr = parse_expr("z^2 + 0.5*sin(z) - 3*z + 2") - Const(1.5) * Var()
        z = np.array([0.2 + 0.3j, -1.0, 2.5j])

        assert np.allclose(cancel_linear(expr)(z), expr(z), atol=1e-13)

    def test_composition_cancels(self):
        """Test g(g(z)) − z for g = f/2 with f = e^{-z} + 2z has no linear part left."""
        g = mul(Const(0.5), parse_expr("exp(-z) + 2*z"))

        rest, slope, intercept = collect_affine(substitute(g, g) - Var())

        assert slope == 0
        assert intercept == 0
        assert len(rest) == 2
