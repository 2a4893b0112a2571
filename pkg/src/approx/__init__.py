"""Adaptive data approximation: GREEDY, COEFF, RHS."""
from .coeff import CoeffResult, coeff, repair_field, repair_positivity
from .greedy import GreedyResult, aggregate, greedy
from .local import LocalError, local_best, local_errors, oscillation_errors
from .meyers import MeyersParams, MeyersRange, conjugate_exponent, interpolation_weight, meyers_range
from .oracle import CoefficientOracle
from .rhs import RhsResult, rhs

__all__ = [
    "CoeffResult",
    "coeff",
    "repair_field",
    "repair_positivity",
    "GreedyResult",
    "aggregate",
    "greedy",
    "LocalError",
    "local_best",
    "local_errors",
    "oscillation_errors",
    "MeyersParams",
    "MeyersRange",
    "conjugate_exponent",
    "interpolation_weight",
    "meyers_range",
    "CoefficientOracle",
    "RhsResult",
    "rhs",
]
