"""
Adaptive subdivision quadrature for integrands with unresolved discontinuities.

Each cell is compared against the sum over its four midpoint children; a cell
is accepted when the two agree within tol * area(cell) / area(root). Cells
are processed level by level, batched across all root triangles.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from config.settings import settings
from src.core.errors import QuadratureError
from src.quadrature.rules import DUNAVANT_4, Integrand, QuadratureRule, integrate_elements

logger = structlog.get_logger()


@dataclass
class AdaptiveResult:
    """Integrals plus a per-triangle flag set when max_depth stopped refinement."""
    values: np.ndarray
    depth_exceeded: np.ndarray

    @property
    def any_depth_exceeded(self) -> bool:
        return bool(self.depth_exceeded.any())


def subdivide(corners: np.ndarray) -> np.ndarray:
    """Split each triangle into its four midpoint children: (n, 3, 2) -> (n, 4, 3, 2)."""
    p0, p1, p2 = corners[:, 0], corners[:, 1], corners[:, 2]
    m01 = 0.5 * (p0 + p1)
    m12 = 0.5 * (p1 + p2)
    m20 = 0.5 * (p2 + p0)
    return np.stack([
        np.stack([p0, m01, m20], axis=1),
        np.stack([m01, p1, m12], axis=1),
        np.stack([m20, m12, p2], axis=1),
        np.stack([m12, m20, m01], axis=1),
    ], axis=1)


def integrate_adaptive_batch(
    fn: Integrand,
    corners: np.ndarray,
    tol: Optional[float] = None,
    max_depth: Optional[int] = None,
    rule: QuadratureRule = DUNAVANT_4,
    indexed: bool = False,
    rel_tol: float = 0.0
) -> AdaptiveResult:
    """
    Adaptive quadrature over many root triangles.

    Args:
        fn: Vectorised integrand (scalar, vector or matrix valued)
        corners: Root triangles, shape (m, 3, 2)
        tol: Absolute tolerance per root triangle (default: DISC_QUAD_TOL)
        max_depth: Maximum number of subdivision levels (default: DISC_QUAD_MAX_DEPTH)
        rule: Fixed rule applied on every cell
        indexed: Call fn(points, root_index) so it can use per-root data
        rel_tol: Also accept a cell when the estimates agree to this relative
            accuracy; keeps the work per level bounded near point singularities

    Returns:
        AdaptiveResult with values of shape (m,) or (m, ...)
    """
    tol = settings.quad_tol if tol is None else tol
    max_depth = settings.quad_max_depth if max_depth is None else max_depth
    if tol <= 0:
        raise QuadratureError("Adaptive quadrature needs tol > 0", {"tol": tol})
    if max_depth < 0:
        raise QuadratureError("max_depth must be nonnegative", {"max_depth": max_depth})

    corners = np.asarray(corners, dtype=float)
    m = len(corners)
    cells = corners
    owner = np.arange(m)
    fraction = np.ones(m)
    coarse = integrate_elements(fn, cells, rule, owner if indexed else None)

    values = np.zeros_like(coarse)
    exceeded = np.zeros(m, dtype=bool)

    for depth in range(max_depth + 1):
        if len(cells) == 0:
            break
        children = subdivide(cells).reshape(-1, 3, 2)
        child_values = integrate_elements(fn, children, rule, np.repeat(owner, 4) if indexed else None)
        child_values = child_values.reshape(len(cells), 4, *child_values.shape[1:])
        refined = child_values.sum(axis=1)

        diff = np.abs(refined - coarse)
        if diff.ndim > 1:
            diff = diff.reshape(len(cells), -1).max(axis=1)
        converged = diff <= tol * fraction
        if rel_tol > 0:
            scale = np.abs(refined)
            if scale.ndim > 1:
                scale = scale.reshape(len(cells), -1).max(axis=1)
            converged |= diff <= rel_tol * scale

        if depth == max_depth:
            accept = np.ones(len(cells), dtype=bool)
            exceeded[np.unique(owner[~converged])] = True
        else:
            accept = converged

        np.add.at(values, owner[accept], refined[accept])

        keep = ~accept
        cells = children.reshape(len(cells), 4, 3, 2)[keep].reshape(-1, 3, 2)
        coarse = child_values[keep].reshape(-1, *child_values.shape[2:])
        owner = np.repeat(owner[keep], 4)
        fraction = np.repeat(fraction[keep] / 4.0, 4)

    if exceeded.any():
        logger.debug("Adaptive quadrature hit max depth", triangles=int(exceeded.sum()), max_depth=max_depth)
    return AdaptiveResult(values=values, depth_exceeded=exceeded)


def integrate_adaptive(
    fn: Integrand,
    triangle: np.ndarray,
    tol: Optional[float] = None,
    max_depth: Optional[int] = None,
    rule: QuadratureRule = DUNAVANT_4
) -> tuple[float, bool]:
    """
    Adaptive quadrature on one triangle.

    Returns:
        (best estimate, True if max_depth was reached before convergence)
    """
    result = integrate_adaptive_batch(fn, np.asarray(triangle, dtype=float)[None], tol, max_depth, rule)
    value = result.values[0]
    return (float(value) if np.ndim(value) == 0 else value), bool(result.depth_exceeded[0])
