"""
Residual a posteriori error estimator.

    eta_T = diam(T) ||f + div(A grad U)||_{L2(T)}
            + ( sum_{F in edges(T)} diam(F) ||[A grad U . n]||^2_{L2(F)} )^{1/2}

Jumps are taken over interior edges only; each edge contributes to both
adjacent elements.
"""
from dataclasses import dataclass

import numpy as np
import structlog

from src.fem.fields import PwPolyMatrix, PwPolyScalar
from src.fem.space import P1Space
from src.quadrature.rules import EDGE_MIDPOINT

logger = structlog.get_logger()


@dataclass
class EstimatorReport:
    """Per-element indicators of one partition."""
    partition: np.ndarray
    indicators: np.ndarray      # eta_T >= 0
    interior: np.ndarray        # diam(T) ||R||_{L2(T)}
    jumps: np.ndarray           # (sum_F diam(F) ||J||^2)^{1/2}

    @property
    def total(self) -> float:
        return float(np.sqrt(np.sum(self.indicators ** 2)))

    @property
    def n_elements(self) -> int:
        return len(self.indicators)


def divergence(space: P1Space, A: PwPolyMatrix, U: np.ndarray) -> np.ndarray:
    """div(A grad U) per element; constant because A is affine and grad U constant."""
    g = space.element_gradients(U)                                  # (m, 2)
    flux_at_vertices = np.einsum("mvij,mj->mvi", A.vertex_matrices(), g)
    return np.einsum("mvi,mvi->m", space.gradients, flux_at_vertices)


def interior_residuals(space: P1Space, A: PwPolyMatrix, f: PwPolyScalar, U: np.ndarray) -> np.ndarray:
    """||f + div(A grad U)||_{L2(T)} per element (exact for affine f)."""
    residual = f.at_barycentric(EDGE_MIDPOINT.points) + divergence(space, A, U)[:, None]
    squared = (residual ** 2) @ EDGE_MIDPOINT.weights * space.areas
    return np.sqrt(squared)


def jump_contributions(space: P1Space, A: PwPolyMatrix, U: np.ndarray) -> np.ndarray:
    """sum over interior edges F of T of diam(F) ||[A grad U . n]||^2_{L2(F)}."""
    edges = space.topology.interior
    contributions = np.zeros(space.n_elements)
    if len(edges) == 0:
        return contributions

    dof = space.dof_of_vertex
    ends = dof[edges.vertices]                                     # (k, 2) dofs of a, b
    tangent = space.coordinates[ends[:, 1]] - space.coordinates[ends[:, 0]]
    length = np.linalg.norm(tangent, axis=1)
    normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / length[:, None]

    g = space.element_gradients(U)
    matrices = A.vertex_matrices()                                 # (m, 3, 2, 2)

    # Normal flux at both edge endpoints, seen from each side
    flux = np.zeros((len(edges), 2, 2))                            # (edge, side, endpoint)
    for side in range(2):
        elem = edges.elements[:, side]
        local_dofs = space.elements[elem]                          # (k, 3)
        for end in range(2):
            position = np.argmax(local_dofs == ends[:, end][:, None], axis=1)
            A_end = matrices[elem, position]                       # (k, 2, 2)
            flux[:, side, end] = np.einsum("ki,kij,kj->k", normal, A_end, g[elem])

    jump = flux[:, 0] - flux[:, 1]                                 # affine along the edge
    ja, jb = jump[:, 0], jump[:, 1]
    squared_norm = length * (ja ** 2 + ja * jb + jb ** 2) / 3.0
    weighted = length * squared_norm

    np.add.at(contributions, edges.elements[:, 0], weighted)
    np.add.at(contributions, edges.elements[:, 1], weighted)
    return contributions


def estimate(space: P1Space, U: np.ndarray, A: PwPolyMatrix, f: PwPolyScalar) -> EstimatorReport:
    """
    Residual indicators of a discrete solution.

    Args:
        space: P1 space on a conforming partition
        U: Full dof vector
        A: Coefficient approximation (on the space's partition or a coarsening)
        f: Right-hand side approximation (on the space's partition or a coarsening)

    Returns:
        EstimatorReport
    """
    A = A.restrict(space.forest, space.partition)
    f = f.restrict(space.forest, space.partition)

    interior = space.diameters * interior_residuals(space, A, f, U)
    jumps = np.sqrt(jump_contributions(space, A, U))
    report = EstimatorReport(
        partition=space.partition,
        indicators=interior + jumps,
        interior=interior,
        jumps=jumps,
    )
    logger.debug("Estimator evaluated", elements=report.n_elements, eta=report.total)
    return report
