"""
Constructions: Baker domain, wandering-domain escape, Runge approximation and
the oscillating wandering domain.
"""
from .baker import (BakerRegionParams, ConjugacyResult, absorption_test, baker_map,
                    in_R_alpha, membership_alpha, psi, verify_conjugacy, verify_drift,
                    verify_escape, verify_injectivity, verify_invariance)
from .wander import (WanderParams, basin_index, boundary_growth_test, build_maps,
                     capture_rate, make_params, probe_boundaries)
from .runge import DiskTarget, InterpCondition, PolyApproximant, approximate, validate
from .manifolds import (ManifoldSeries, ManifoldTarget, SaddleModel, ShotOrbit, lambda_shoot,
                        linearize, manifold_point, manifold_target)
from .oscillate import (ConstructionState, DetourPlan, construct, contraction_check,
                        detour_ratios, g_probe, next_round, oscillation_witness, plan_detour,
                        seed_state, verify_round)

__all__ = [
    "BakerRegionParams", "ConjugacyResult", "absorption_test", "baker_map", "in_R_alpha",
    "membership_alpha", "psi", "verify_conjugacy", "verify_drift", "verify_escape",
    "verify_injectivity", "verify_invariance",
    "WanderParams", "basin_index", "boundary_growth_test", "build_maps", "capture_rate",
    "make_params", "probe_boundaries",
    "DiskTarget", "InterpCondition", "PolyApproximant", "approximate", "validate",
    "ManifoldSeries", "ManifoldTarget", "SaddleModel", "ShotOrbit", "lambda_shoot",
    "linearize", "manifold_point", "manifold_target",
    "ConstructionState", "DetourPlan", "construct", "contraction_check", "detour_ratios",
    "g_probe", "next_round", "oscillation_witness", "plan_detour", "seed_state",
    "verify_round",
]
