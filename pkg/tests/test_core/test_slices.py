"""
Tests for slice grids.
"""
import numpy as np
import pytest

from src.core.slices import SliceSpec


class TestSliceSpec:
    def test_resolution_floor(self):
        """Test that grids smaller than 16×16 are rejected."""
        with pytest.raises(ValueError):
            SliceSpec((0, 0), (1, 0), (1j, 0), (1, 1), (8, 16))

    def test_dependent_axes_rejected(self):
        """Test that real-dependent axes are rejected."""
        with pytest.raises(ValueError):
            SliceSpec((0, 0), (1, 0), (2, 0), (1, 1), (16, 16))

    def test_complex_line_axes_are_independent(self):
        """Test that u and i·u span a complex line."""
        spec = SliceSpec.complex_line((0, 0), (1, 1), 0.0, (2, 2), (16, 16))

        assert spec.axis_v == (1j, 1j)

    def test_pixel_centres(self):
        """Test pixel-centre parameters and row layout."""
        spec = SliceSpec((3, 0), (1, 0), (1j, 0), (10, 10), (16, 16))

        s, t = spec.params()
        row = spec.row_points(0)

        assert s[0] == pytest.approx(-5 + 10 / 32)
        assert t[0] == pytest.approx(5 - 10 / 32)
        assert row.shape == (2, 16)
        assert np.allclose(row[1], 0)
        assert row[0, 0] == pytest.approx(3 + s[0] + 1j * t[0])
        assert spec.points().shape == (2, 16, 16)
