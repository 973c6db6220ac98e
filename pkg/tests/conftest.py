"""
Shared fixtures.
"""
import numpy as np
import pytest

from src.core.henon import HenonMap
from src.constructions.baker import baker_map


@pytest.fixture
def baker():
    return baker_map()


@pytest.fixture
def rotation_map():
    """f(z) = 0, δ = 1: (z, w) ↦ (−w, z)."""
    return HenonMap.standard("0", 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Keep sweeps in-process unless a test asks for workers explicitly."""
    monkeypatch.setenv("HENON_WORKERS", "1")
    from config import settings
    monkeypatch.setattr(settings, "HENON_WORKERS", 1)
