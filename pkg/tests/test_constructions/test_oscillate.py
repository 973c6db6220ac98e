"""
Tests for the inductive oscillating-domain construction.
"""
import json
from dataclasses import replace

import numpy as np
import pytest

from config import settings
from src.constructions import oscillate
from src.constructions.oscillate import (
    ConstructionState, backward_radii, construct, contraction_check, detour_ratios, g_probe,
    next_round, oscillation_witness, plan_detour, seed_state, sphere_directions, verify_round
)
from src.core.expr import NewtonPoly, Poly
from src.core.henon import HenonMap, spectral_norm
from src.dynamics.orbit import EscapeKind
from src.utils.error_handler import DegreeCapExceeded, IllConditioned, Infeasible


@pytest.fixture
def seed():
    return seed_state()


class TestSeedState:
    def test_round_zero_passes(self, seed):
        """Test the seed state satisfies every inductive property."""
        # Act
        report = verify_round(seed)

        # Assert
        assert seed.k == 0
        assert seed.n_k == 0
        assert seed.R == 1.0 and seed.theta == 1.0
        assert seed.betas.tolist() == [0.5]
        assert report["all_pass"] is True
        assert report["properties"]["iv"]["outer_slack"] == pytest.approx(1.0)

    @pytest.mark.parametrize("kwargs", [
        {"z0": 6.0},
        {"z0": 3.0 + 3.0j},
        {"c": 0.5},
        {"a_second": 0.6},
    ], ids=["on-boundary", "inside", "c-below-a-prime", "a-second-above-a"])
    def test_rejects_bad_seeds(self, kwargs):
        """Test seeds that violate |z0| > 6 or the constant ordering raise ValueError."""
        with pytest.raises(ValueError):
            seed_state(**kwargs)

    def test_initial_map_is_identity_plus_shear(self, seed):
        """Test F_0(z, w) = (z + w/2, z/2)."""
        # Act
        image = seed.map.apply(np.array([2.0, 4.0], dtype=complex))

        # Assert
        assert np.allclose(image, [4.0, 1.0])


class TestRho:
    def test_windows(self, seed):
        """Test ρ(n) counts the detour windows already closed, with n'_{-1} = 0."""
        # Arrange
        state = replace(seed, primes=(3, 10))

        # Act
        rhos = [state.rho(n) for n in (0, 2, 3, 9, 10, 25)]

        # Assert
        assert rhos == [0, 0, 1, 1, 2, 2]

    def test_no_rounds(self, seed):
        """Test every index belongs to round 0 before any detour."""
        assert seed.rho(0) == 0
        assert seed.rho(100) == 0


class TestPlanDetour:
    def test_geometry(self):
        """Test the detour starts at z_nk, circles at the given radius and ends at w'_0/a."""
        # Act
        plan = plan_detour(10.0, 5.0, 0.25, steps=8, a=0.5)

        # Assert
        assert plan.steps == 8
        assert plan.radius == pytest.approx(13.0)
        assert plan.z[0] == 10.0
        assert plan.z[-1] == pytest.approx(0.5)
        assert np.allclose(np.abs(plan.z[1:-1]), 13.0)
        assert plan.w[0] == 5.0
        assert np.allclose(plan.w[1:], 0.5 * plan.z[:-1])

    def test_targets_chain_the_detour(self):
        """Test f(z''_j) = target_j makes F carry each detour point to the next."""
        # Arrange
        plan = plan_detour(10.0, 5.0, 0.25, steps=8, a=0.5)
        z_prime_0 = 0.3 + 0.1j

        # Act
        targets = plan.targets(0.5, z_prime_0)

        # Assert
        assert len(targets) == 9
        assert np.allclose(targets + 0.5 * plan.w, np.append(plan.z[1:], z_prime_0))

    def test_infeasible_when_crowded(self):
        """Test 40 steps cannot fit on a circle of radius 10."""
        with pytest.raises(Infeasible) as info:
            plan_detour(7.0, 0.0, 0.25, steps=40, a=0.5, radius=10.0)
        assert info.value.details["closest"] < 2.0

    def test_min_spacing_is_honored(self):
        """Test a wider spacing request rejects a plan the default accepts."""
        # Arrange
        plan_detour(10.0, 0.0, 0.25, steps=8, a=0.5)

        # Act / Assert
        with pytest.raises(Infeasible):
            plan_detour(10.0, 0.0, 0.25, steps=8, a=0.5, min_spacing=12.0)

    @pytest.mark.parametrize("kwargs", [
        {"steps": 0},
        {"steps": 4, "radius": 11.0},
    ], ids=["no-steps", "circle-too-small"])
    def test_invalid_arguments(self, kwargs):
        """Test degenerate detours raise ValueError."""
        with pytest.raises(ValueError):
            plan_detour(10.0, 0.0, 0.25, a=0.5, **kwargs)


class TestContractionCheck:
    def test_nearly_constant_map_contracts(self):
        """Test f close to a constant gives ratios near a, inside [a'', a']."""
        # Arrange
        m = HenonMap.alternative(Poly((2.0 + 0j, 0.01)), 0.5)

        # Act
        result = contraction_check(m, (0j, 0.5), (0j, 1.0), 2.0, 0.55, 0.45, n_pairs=2000)

        # Assert
        assert result["ordering_ok"] is True
        assert result["lower_ok"] and result["upper_ok"]
        assert 0.45 <= result["min_ratio"] <= result["max_ratio"] <= 0.55
        assert result["alpha_certified"] == pytest.approx(0.025)
        assert result["deviation"] == pytest.approx(0.01, rel=1e-6)
        assert result["deviation_within_alpha"] is True

    def test_expanding_map_is_flagged(self):
        """Test f(z) = 2z violates the upper bound and the certified deviation."""
        # Arrange
        m = HenonMap.alternative(Poly((0j, 2.0)), 0.5)

        # Act
        result = contraction_check(m, (0j, 0.5), (0j, 1.0), 0.0, 0.55, 0.45, n_pairs=2000)

        # Assert
        assert result["upper_ok"] is False
        assert result["max_ratio"] > 1.0
        assert result["deviation_within_alpha"] is False


class TestBackwardRadii:
    def test_linear_recursion(self):
        """Test radii shrink by 1.15 times the constant differential norm per step."""
        # Arrange
        m = HenonMap.alternative(Poly((0j, 2.0)), 0.5)
        points = np.array([[1.0, 0.0], [2.0, 0.5], [4.5, 1.0]], dtype=complex)
        lipschitz = spectral_norm(np.array([[2.0, 0.5], [0.5, 0.0]]))

        # Act
        radii = backward_radii(m, points, end_radius=0.1, cap=1.0)

        # Assert
        assert radii[-1] == pytest.approx(0.1)
        assert radii[1] == pytest.approx(0.1 / (1.15 * lipschitz), rel=1e-9)
        assert radii[0] == pytest.approx(0.1 / (1.15 * lipschitz) ** 2, rel=1e-9)

    def test_cap(self):
        """Test no radius exceeds the cap."""
        # Arrange
        m = HenonMap.alternative(Poly((0j, 0.1)), 0.5)
        points = np.zeros((4, 2), dtype=complex)

        # Act
        radii = backward_radii(m, points, end_radius=5.0, cap=0.2)

        # Assert
        assert radii[-1] == pytest.approx(0.2)
        assert np.all(radii <= 0.2)


class TestVerifyRound:
    def test_property_i_negative_control(self, seed):
        """Test a replaced f that moves by 0.1 on D(0, R_{k-1}) fails the ε = 0.01 bound."""
        # Arrange
        state = replace(seed, k=1, f=Poly((0j, 1.1)), f_prev=Poly((0j, 1.0)),
                        thetas=(1.0, 0.5), radii=(1.0, 2.0), epsilons=(0.01,),
                        marks=(0, 0), primes=(0,))

        # Act
        report = verify_round(state)

        # Assert
        prop = report["properties"]["i"]
        assert prop["pass"] is False
        assert prop["sup"] == pytest.approx(0.1, rel=1e-6)
        assert report["all_pass"] is False

    def test_property_i_unchanged_map(self, seed):
        """Test f_k = f_{k-1} passes property (i) with zero deviation."""
        # Arrange
        state = replace(seed, k=1, f_prev=seed.f, thetas=(1.0, 0.5), radii=(1.0, 2.0),
                        epsilons=(0.01,), marks=(0, 0), primes=(0,))

        # Act
        prop = verify_round(state)["properties"]["i"]

        # Assert
        assert prop["pass"] is True
        assert prop["sup"] == 0.0

    def test_property_ii_detects_a_broken_orbit(self, seed):
        """Test a stored point that is not the image of its predecessor fails (ii)."""
        # Arrange
        state = replace(seed, orbit=np.array([[7.0, 0.0], [100.0, 0.0]], dtype=complex),
                        betas=np.array([0.5, 0.4]), marks=(1,))

        # Act
        prop = verify_round(state)["properties"]["ii"]

        # Assert
        assert prop["pass"] is False
        assert prop["max_residual"] > 0.5

    def test_property_ii_accepts_a_true_orbit(self, seed):
        """Test the F_0-image of P_0 satisfies (ii)."""
        # Arrange
        p1 = seed.map.apply(seed.orbit[0])
        state = replace(seed, orbit=np.vstack([seed.orbit, p1]),
                        betas=np.array([0.5, 0.4]), marks=(1,))

        # Act
        prop = verify_round(state)["properties"]["ii"]

        # Assert
        assert prop["pass"] is True
        assert prop["max_residual"] < 1e-12


class TestStateSerialization:
    def test_dict_round_trip(self, seed):
        """Test a state survives JSON serialization."""
        # Arrange
        state = replace(seed, f_prev=Poly((0j, 1.0)), history=({"round": 1, "epsilon": 0.5},))

        # Act
        restored = ConstructionState.from_dict(json.loads(json.dumps(state.to_dict())))

        # Assert
        assert restored.k == state.k
        assert np.array_equal(restored.orbit, state.orbit)
        assert np.array_equal(restored.betas, state.betas)
        assert restored.f.coeffs == state.f.coeffs
        assert restored.f_prev.coeffs == (0j, 1.0 + 0j)
        assert restored.marks == state.marks and restored.primes == state.primes
        assert restored.history == state.history

    def test_newton_form_round_trip(self, seed):
        """Test a fitted Newton-form map survives JSON serialization."""
        # Arrange
        f = NewtonPoly((0j, 1.0, 0.25j), nodes=(0.5, -0.5j), capacity=0.8, scale=12.0)
        state = replace(seed, f=f, f_prev=seed.f)

        # Act
        restored = ConstructionState.from_dict(json.loads(json.dumps(state.to_dict())))

        # Assert
        assert restored.f == f
        assert restored.f_prev == seed.f
        z = np.array([1.0, 3.0 - 2.0j])
        assert np.array_equal(restored.map.apply(np.stack([z, z])), state.map.apply(np.stack([z, z])))

    def test_orbit_rows(self, seed):
        """Test orbit rows carry coordinates, radius and round index."""
        # Act
        rows = seed.orbit_rows()

        # Assert
        assert rows == [{"n": 0, "z_re": 7.0, "z_im": 0.0, "w_re": 0.0, "w_im": 0.0,
                         "beta": 0.5, "rho": 0}]


class TestProbes:
    def test_sphere_directions_are_unit(self):
        """Test sampled directions lie on the unit sphere of C^2."""
        # Act
        dirs = sphere_directions(64, seed=3)

        # Assert
        assert dirs.shape == (2, 64)
        assert np.allclose(np.linalg.norm(dirs, axis=0), 1.0)

    def test_g_probe_needs_orbit(self, seed):
        """Test g_n is undefined before the first round."""
        with pytest.raises(ValueError):
            g_probe(seed, np.zeros((2, 3), dtype=complex))

    def test_witness_needs_two_rounds(self, seed):
        """Test the oscillation witness refuses states with K < 2."""
        with pytest.raises(ValueError):
            oscillation_witness(seed)

    def test_detour_ratios_without_detours(self, seed):
        """Test the seed has no detour balls to measure."""
        # Act
        result = detour_ratios(seed)

        # Assert
        assert result == {"balls": 0, "min_ratio": None, "max_ratio": None,
                          "within_bounds": True}

    def test_construct_zero_rounds(self):
        """Test zero rounds returns the seed without calling the callback."""
        # Arrange
        seen = []

        # Act
        state = construct(0, on_round=seen.append)

        # Assert
        assert state.k == 0
        assert seen == []


class TestThetaFallback:
    def test_runge_failure_halves_theta(self, seed, monkeypatch):
        """Test that a failed Runge step replans the round with a smaller θ."""
        # Arrange
        shrinks = []

        def plan(state, seed, shrink=0):
            shrinks.append(shrink)
            return shrink

        def fit(state, plan, workers, degree_cap, seed):
            if plan == 0:
                raise DegreeCapExceeded("too far", best=None)
            return "next"

        monkeypatch.setattr(oscillate, "_plan_round", plan)
        monkeypatch.setattr(oscillate, "_fit_round", fit)

        # Act
        result = next_round(seed)

        # Assert
        assert result == "next"
        assert shrinks == [0, 1]

    def test_last_failure_is_raised(self, seed, monkeypatch):
        """Test the error of the last θ retry propagates."""
        # Arrange
        def fit(state, plan, workers, degree_cap, seed):
            raise IllConditioned("no degree", shrink=plan)

        monkeypatch.setattr(oscillate, "_plan_round", lambda state, seed, shrink=0: shrink)
        monkeypatch.setattr(oscillate, "_fit_round", fit)

        # Act
        with pytest.raises(IllConditioned) as info:
            next_round(seed)

        # Assert
        assert info.value.details["shrink"] == settings.OSC_THETA_RETRIES


@pytest.fixture(scope="module")
def two_rounds():
    states = []
    construct(2, state=seed_state(c=0.6), workers=1, on_round=states.append)
    return states


@pytest.mark.slow
class TestNextRound:
    def test_rounds_one_and_two_verify(self, two_rounds):
        """Test that rounds 1 and 2 complete and pass all five inductive properties."""
        # Act
        reports = [verify_round(state) for state in two_rounds]

        # Assert
        assert [state.k for state in two_rounds] == [1, 2]
        for report in reports:
            assert report["all_pass"] is True, report
        assert [h["round"] for h in two_rounds[-1].history] == [1, 2]

    def test_round_bookkeeping(self, two_rounds):
        """Test orbit, radii and marks grow consistently over two rounds."""
        # Arrange
        state = two_rounds[-1]

        # Assert
        assert len(state.betas) == len(state.orbit) == state.n_k + 1
        assert state.marks[0] < state.primes[0] < state.marks[1] < state.primes[1] < state.n_k
        assert state.radii[0] < state.radii[1] < state.radii[2]
        assert state.thetas[2] < state.thetas[1] < state.thetas[0]
        assert all(eps <= 2.0 ** -(j + 1) for j, eps in enumerate(state.epsilons))

    def test_detours_contract(self, two_rounds):
        """Test F contracts every calibrated detour ball within [a'', a']."""
        # Act
        ratios = detour_ratios(two_rounds[-1])

        # Assert
        assert ratios["balls"] > 0
        assert ratios["within_bounds"] is True

    def test_oscillation_witness(self, two_rounds):
        """Test the orbit of P_0 leaves R_1 and comes back within 1/2 of the origin."""
        # Act
        record = oscillation_witness(two_rounds[-1])

        # Assert
        assert record.kind is EscapeKind.OSCILLATING

    def test_input_state_is_untouched(self, two_rounds):
        """Test that building round 2 left the round-1 state as it was."""
        # Arrange
        first = two_rounds[0]

        # Assert
        assert first.k == 1
        assert len(first.history) == 1
        assert verify_round(first)["all_pass"] is True
