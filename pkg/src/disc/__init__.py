"""Outer DISC loop and perturbation checks."""
from .config import DiscConfig, ExactSolution
from .driver import count_dofs, disc
from .perturbation import (
    PerturbationResult,
    ScalingResult,
    coefficient_distance,
    perturbation_check,
    scaling_identity_check,
)
from .trace import TRACE_COLUMNS, DiscTrace, TraceRow, read_trace

__all__ = [
    "DiscConfig",
    "ExactSolution",
    "count_dofs",
    "disc",
    "PerturbationResult",
    "ScalingResult",
    "coefficient_distance",
    "perturbation_check",
    "scaling_identity_check",
    "TRACE_COLUMNS",
    "DiscTrace",
    "TraceRow",
    "read_trace",
]
