"""
Tests for the Baker domain construction.
"""
import math

import numpy as np
import pytest

from src.constructions.baker import (BakerRegionParams, L_matrix, L_pow, absorption_test,
                                     in_R_alpha, membership_alpha, psi, sample_R_alpha,
                                     verify_conjugacy, verify_drift, verify_escape,
                                     verify_injectivity, verify_invariance,
                                     limit_point_report)
from src.utils.error_handler import NotInRegion


class TestRegion:
    def test_eta_constant(self):
        """Test A_1 = e^{-1}/(1 − e^{-1})."""
        assert BakerRegionParams(1.0).A_alpha == pytest.approx(0.5819767, abs=1e-7)

    def test_alpha_must_be_positive(self):
        """Test validation of α."""
        with pytest.raises(ValueError):
            BakerRegionParams(0.0)

    def test_boundary_membership(self):
        """Test strict membership just inside and outside ∂R_1 at w = 0."""
        edge = 1.0 + BakerRegionParams(1.0).A_alpha

        assert bool(in_R_alpha(np.array([edge + 1e-9, 0.0]), 1.0))
        assert not bool(in_R_alpha(np.array([edge - 1e-3, 0.0]), 1.0))

    def test_membership_alpha(self):
        """Test the largest grid α for a point deep inside."""
        alpha = membership_alpha(np.array([20.0, 0.0]))

        assert alpha is not None
        assert bool(in_R_alpha(np.array([20.0, 0.0]), alpha))
        assert membership_alpha(np.array([0.0, 0.0])) is None

    def test_samples_are_members(self):
        """Test rejection sampling of R_α."""
        points = sample_R_alpha(1.0, 20.0, 300, seed=4)

        assert points.shape == (2, 300)
        assert np.all(in_R_alpha(points, 1.0))
        assert np.all(np.abs(points) <= 20.0 + 1e-12)


class TestLinearModel:
    def test_inverse_power(self):
        """Test L^{-n} ∘ L^n = Id."""
        p = np.array([1.5 + 2j, -0.5j])

        assert np.allclose(L_pow(-7, L_pow(7, p)), p)

    def test_matrix_matches(self):
        """Test L^n as a matrix."""
        p = np.array([2.0, 1.0j])

        assert np.allclose(L_matrix(3) @ p, L_pow(3, p))

    def test_baker_is_perturbed_linear_map(self, baker):
        """Test F(p) − L(p) = (e^{-z}, 0)."""
        p = np.array([3.0 + 1j, 2.0])

        assert np.allclose(baker.apply(p) - L_pow(1, p), [np.exp(-p[0]), 0.0])


class TestVerifications:
    def test_invariance(self):
        """Test F(R_1) ⊂ R_1 on samples."""
        report = verify_invariance(1.0, 20.0, 2000, seed=1)

        assert report["violations"] == 0
        assert report["fraction_invariant"] == 1.0

    def test_invariance_reports_violators(self):
        """Test that points outside R_1 are reported verbatim."""
        samples = np.array([[0.0, 20.0], [0.0, 0.0]], dtype=complex)

        report = verify_invariance(1.0, 20.0, 2, samples=samples)

        assert report["violations"] == 1
        assert report["violating_samples"] == [[[0.0, 0.0], [0.0, 0.0]]]

    def test_drift(self):
        """Test the per-step and cumulative drift bounds."""
        report = verify_drift(1.0, 20.0, 200, steps=50, seed=2)

        assert report["step_violations"] == 0
        assert report["cumulative_violations"] == 0
        assert report["min_drift_slack"] > 0

    def test_escape(self):
        """Test that R_1 orbits escape to [1:1:0]."""
        report = verify_escape(1.0, 20.0, 50, steps=200, seed=3)

        assert report["failures"] == 0
        assert report["max_limit_distance"] < 1e-6

    def test_limit_point_report(self):
        """Test R_1 orbits all reach [1:1:0] while orbits from Re(z − w) ≪ 0 do not."""
        # Act
        report = limit_point_report(1.0, n_samples=50, steps=200, seed=3)

        # Assert
        assert report["inside_samples"] == 50
        assert report["inside_to_limit"] == 50
        assert report["outside_escaping"] + report["outside_overflowed"] <= report["outside_samples"]
        assert report["outside_escaping"] < report["outside_samples"]


class TestConjugacy:
    def test_psi_in_omega(self):
        """Test ψ of a deep point lies in Ω = {Re(z − w) > 0}."""
        result = psi(np.array([10.0, 0.0]), tol=1e-8, alpha=1.0)

        assert result.in_Omega
        assert result.tail_bound < 1e-8
        assert result.terms_used >= 0

    def test_psi_outside_region(self):
        """Test NotInRegion for points outside every R_α."""
        with pytest.raises(NotInRegion):
            psi(np.array([0.0, 0.0]))

    def test_psi_tolerance_positive(self):
        """Test that tol must be positive."""
        with pytest.raises(ValueError):
            psi(np.array([10.0, 0.0]), tol=0.0)

    def test_pullback(self, baker):
        """Test ψ by pullback equals L^{-1} ψ(F p)."""
        # Arrange
        p = np.array([1.0, 0.5])

        # Act
        pulled = psi(p, pullback=True)
        forward = psi(baker.apply(p), pullback=True)

        # Assert
        assert pulled.pullback_steps >= 1
        expected = L_pow(-1, np.array(forward.psi_value))
        assert np.allclose(np.array(pulled.psi_value), expected, atol=1e-6)

    def test_conjugacy_residual(self):
        """Test ‖L(ψ(p)) − ψ(F(p))‖ on R_1 samples."""
        report = verify_conjugacy(alpha=1.0, n_samples=40, tol=1e-8)

        assert report["max_conjugacy_residual"] < 1e-6
        assert report["all_in_Omega"]

    def test_injectivity(self):
        """Test that ψ separates nearby points."""
        report = verify_injectivity(n_pairs=30, seed=2)

        assert report["pairs"] == 30
        assert report["failures"] == 0

    @pytest.mark.slow
    def test_absorption(self):
        """Test that Fatou-probed slab samples enter R_{α/3}."""
        report = absorption_test(n_samples=20, seed=1)

        assert report["heuristic"]
        assert report["drawn"] == 20
        assert report["tested"] + report["excluded"] == 20
        assert len(report["not_absorbed"]) == report["tested"] - report["absorbed"]
