"""
Tests for orbit classification and the orbit probes.
"""
import math

import numpy as np
import pytest

from src.core.henon import HenonMap
from src.core.projective import LIMIT_BAKER, fs_distance
from src.core.slices import SliceSpec
from src.dynamics.orbit import (EscapeKind, ball_samples, classify, classify_orbits,
                                equicontinuity_profile, escape_direction, fit_log_slope,
                                psh_probe)


class TestClassify:
    def test_baker_orbit_escapes_to_limit(self, baker):
        """Test that (5, 0) escapes to [1:1:0] under the Baker map."""
        # Act
        record = classify(baker, np.array([5.0, 0.0]), 200)

        # Assert
        assert record.kind is EscapeKind.ESCAPES_TO
        assert record.escape.limit == LIMIT_BAKER
        assert record.escape.residual < 1e-6
        assert escape_direction(record) == pytest.approx(0.0, abs=1e-9)

    def test_rotation_is_bounded(self, rotation_map):
        """Test that an isometry keeps the orbit bounded."""
        record = classify(rotation_map, np.array([0.5, 0.5]), 40)

        assert record.kind is EscapeKind.BOUNDED
        assert record.escape.radius_bound == pytest.approx(math.sqrt(0.5))
        assert record.escape.to_dict()["class"] == "bounded"

    def test_overflow_is_undetermined(self):
        """Test that overflow is never reported as escape."""
        m = HenonMap.standard("exp(z)", 1.0)

        record = classify(m, np.array([10.0, 0.0]), 50)

        assert record.overflow
        assert record.kind is EscapeKind.UNDETERMINED

    def test_u_sequence(self, rotation_map):
        """Test u_n = −Re(z_n)/n along the orbit."""
        record = classify(rotation_map, np.array([1.0, 0.0]), 12)

        # z_n cycles 1, 0, -1, 0 under (z, w) ↦ (−w, z)
        assert record.u[1] == pytest.approx(0.5)
        assert len(record.cocycle_norms) == 13

    def test_escape_is_stable_in_n_max(self, baker):
        """Test that longer runs keep reporting the same limit once escape is found."""
        # Act
        records = [classify(baker, np.array([5.0, 0.0]), n) for n in (60, 120, 240)]

        # Assert
        assert all(r.kind is EscapeKind.ESCAPES_TO for r in records)
        assert all(r.escape.residual < 1e-6 for r in records)
        for shorter, longer in zip(records, records[1:]):
            assert fs_distance(shorter.escape.limit, longer.escape.limit) < 1e-5

    def test_bounded_is_stable_in_n_max(self, rotation_map):
        """Test that a bounded orbit stays bounded with the same radius for longer runs."""
        # Act
        records = [classify(rotation_map, np.array([0.5, 0.5]), n) for n in (20, 40, 80)]

        # Assert
        assert all(r.kind is EscapeKind.BOUNDED for r in records)
        assert len({round(r.escape.radius_bound, 12) for r in records}) == 1

    @pytest.mark.parametrize("kwargs", [
        {"n_max": 9},
        {"n_max": 20, "r_escape": 2.0, "r_bound": 2.0},
    ])
    def test_invalid_arguments(self, baker, kwargs):
        """Test argument validation."""
        with pytest.raises(ValueError):
            classify(baker, np.array([1.0, 0.0]), **kwargs)


class TestClassifyOrbits:
    def test_synthetic_oscillation(self):
        """Test a norm profile that leaves r_escape and returns inside r_bound."""
        # Arrange
        orbits = np.full((21, 2, 1), 0.1 + 0j)
        orbits[5, 0, 0] = 1e4

        # Act
        batch = classify_orbits(orbits, r_escape=1e3, r_bound=2.0)

        # Assert
        assert batch.kind[0] == EscapeKind.OSCILLATING.value
        assert list(batch.witness[:, 0]) == [5, 6]

    def test_never_above_escape(self):
        """Test that staying bounded wins over oscillation."""
        orbits = np.full((21, 2, 1), 0.1 + 0j)

        batch = classify_orbits(orbits, r_escape=1e3, r_bound=2.0)

        assert batch.kind[0] == EscapeKind.BOUNDED.value
        assert batch.escape_time[0] == -1


class TestProbes:
    def test_psh_probe_grid(self, baker):
        """Test the psh probe shape and values far inside the Baker domain."""
        grid = SliceSpec((10.0, 0.0), (1, 0), (1j, 0), (1.0, 1.0), (16, 16))

        field = psh_probe(baker, grid, 20)
        rows = field.to_rows(grid)

        assert field.u.shape == (16, 16)
        assert not field.overflow.any()
        assert np.all(field.u < 0)
        assert len(rows) == 256

    def test_ball_samples_inside(self):
        """Test uniform ball samples stay inside the ball."""
        p = np.array([1.0, 1j])

        samples = ball_samples(p, 0.3, 500, seed=2)

        assert samples.shape == (2, 500)
        assert np.all(np.linalg.norm(samples - p[:, None], axis=0) <= 0.3 + 1e-12)

    def test_unitary_map_is_equicontinuous(self, rotation_map):
        """Test that a unitary linear map keeps the Fubini–Study spread constant."""
        profile = equicontinuity_profile(rotation_map, np.array([0.2, 0.1]), 0.05, 50, 10)

        assert np.allclose(profile, profile[0], atol=1e-12)

    def test_saddle_spread_grows(self, rotation_map):
        """Test that spread near a saddle grows to O(1) while an isometry keeps it small."""
        # Arrange
        saddle = HenonMap.standard("3*z", 1.0)  # eigenvalues (3 ± √5)/2 at the origin
        origin = np.zeros(2, dtype=complex)

        # Act
        growing = equicontinuity_profile(saddle, origin, 1e-3, 200, 30)
        steady = equicontinuity_profile(rotation_map, origin, 1e-3, 200, 30)

        # Assert
        assert growing[0] < 1e-2
        assert growing[-1] > 1.0
        assert growing[-1] > 100 * growing[0]
        assert steady.max() < 1e-2

    def test_zero_radius(self, baker):
        """Test that a zero-radius ball has zero spread."""
        assert not equicontinuity_profile(baker, np.array([1.0, 0.0]), 0.0, 10, 5).any()

    def test_fit_log_slope(self):
        """Test the fitted growth rate of a geometric sequence."""
        norms = 2.0 ** np.arange(21)

        assert fit_log_slope(norms) == pytest.approx(math.log(2))

    def test_fit_log_slope_too_short(self):
        """Test NaN when fewer than two finite logs remain."""
        assert math.isnan(fit_log_slope(np.array([1.0, np.inf])))
