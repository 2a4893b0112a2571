"""Quadrature on triangles."""
from .adaptive import AdaptiveResult, integrate_adaptive, integrate_adaptive_batch, subdivide
from .rules import (
    CENTROID,
    DUNAVANT_4,
    DUNAVANT_6,
    DUNAVANT_8,
    EDGE_MIDPOINT,
    RULES,
    QuadratureRule,
    get_rule,
    integrate,
    integrate_elements,
)

__all__ = [
    "AdaptiveResult",
    "integrate_adaptive",
    "integrate_adaptive_batch",
    "subdivide",
    "QuadratureRule",
    "RULES",
    "CENTROID",
    "EDGE_MIDPOINT",
    "DUNAVANT_4",
    "DUNAVANT_6",
    "DUNAVANT_8",
    "get_rule",
    "integrate",
    "integrate_elements",
]
