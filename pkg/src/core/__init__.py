"""
Numeric core: entire-function expressions, projective geometry and Hénon maps.
"""
from .expr import (Add, Const, Cos, Evaluation, Exp, Expr, IntPow, Mul, Neg, NewtonPoly, Poly,
                   Sin, Var, deriv, evaluate)
from .parser import parse_expr
from .projective import LIMIT_BAKER, ProjPoint, fs_distance, fs_distance_batch
from .henon import HenonMap, Orbit, TranslatedHenonMap, eigenvalues, spectral_norm

__all__ = [
    "Add", "Const", "Cos", "Evaluation", "Exp", "Expr", "IntPow", "Mul", "Neg", "NewtonPoly",
    "Poly", "Sin", "Var", "deriv", "evaluate", "parse_expr", "LIMIT_BAKER", "ProjPoint",
    "fs_distance", "fs_distance_batch", "HenonMap", "Orbit", "TranslatedHenonMap", "eigenvalues",
    "spectral_norm",
]
