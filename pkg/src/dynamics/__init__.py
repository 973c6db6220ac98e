"""
Orbit engine and periodic-point solvers.
"""
from .orbit import (EscapeClass, EscapeKind, OrbitRecord, classify, classify_orbits,
                    equicontinuity_probe, equicontinuity_profile, escape_direction, psh_probe)
from .periodic import (PeriodicPoint, classify_cycle, fixed_points, period2_points,
                       periodicity_residual, saddle_period2)

__all__ = [
    "EscapeClass", "EscapeKind", "OrbitRecord", "classify", "classify_orbits",
    "equicontinuity_probe", "equicontinuity_profile", "escape_direction", "psh_probe",
    "PeriodicPoint", "classify_cycle", "fixed_points", "period2_points",
    "periodicity_residual", "saddle_period2",
]
