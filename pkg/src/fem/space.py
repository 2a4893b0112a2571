"""
Conforming P1 finite element space on the active partition.
"""
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from src.core.errors import NonConformingError
from src.fem.fields import barycentric_gradients
from src.mesh.forest import MeshForest, triangle_areas, triangle_diameters
from src.mesh.topology import Topology, build_topology


class P1Space:
    """
    One degree of freedom per vertex of a conforming partition.

    Dofs are numbered by increasing forest vertex id, so the dofs of a
    coarser partition keep their relative order on every refinement.
    """

    def __init__(self, forest: MeshForest):
        self.forest = forest
        self.partition = forest.active_elements().copy()
        self.topology: Topology = build_topology(forest, self.partition)
        if not self.topology.is_conforming:
            raise NonConformingError(
                "P1 space requires a conforming partition",
                {"hanging_edges": len(self.topology.hanging)}
            )

        ev = forest.element_vertices(self.partition)
        self.vertex_ids = np.unique(ev)
        dof_of_vertex = np.full(forest.n_vertices, -1, dtype=np.int64)
        dof_of_vertex[self.vertex_ids] = np.arange(len(self.vertex_ids))
        self.dof_of_vertex = dof_of_vertex
        self.elements = dof_of_vertex[ev]                       # (m, 3)
        self.coordinates = forest.coordinates[self.vertex_ids].copy()

        on_boundary = forest.boundary_flags[self.vertex_ids]
        self.boundary_dofs = np.nonzero(on_boundary)[0]
        self.interior_dofs = np.nonzero(~on_boundary)[0]

    @property
    def n_dofs(self) -> int:
        return len(self.vertex_ids)

    @property
    def n_elements(self) -> int:
        return len(self.partition)

    @cached_property
    def corners(self) -> np.ndarray:
        return self.coordinates[self.elements]

    @cached_property
    def areas(self) -> np.ndarray:
        return triangle_areas(self.corners)

    @cached_property
    def diameters(self) -> np.ndarray:
        return triangle_diameters(self.corners)

    @cached_property
    def gradients(self) -> np.ndarray:
        """Barycentric gradients per element, shape (m, 3, 2)."""
        return barycentric_gradients(self.corners)

    def element_gradients(self, U: np.ndarray) -> np.ndarray:
        """Constant gradient of a discrete function on each element, shape (m, 2)."""
        return np.einsum("mi,mid->md", U[self.elements], self.gradients)

    def interpolate(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Nodal interpolant of a vectorised function."""
        return np.asarray(fn(self.coordinates), dtype=float)

    def boundary_values(self, fn: Optional[Callable[[np.ndarray], np.ndarray]]) -> np.ndarray:
        """Trace data at the boundary dofs (zero when fn is None)."""
        if fn is None:
            return np.zeros(len(self.boundary_dofs))
        return np.asarray(fn(self.coordinates[self.boundary_dofs]), dtype=float)


def prolongate(coarse: P1Space, U: np.ndarray, fine: P1Space) -> np.ndarray:
    """
    Exact P1 prolongation onto a refinement.

    New vertices are midpoints of forest edges, so their value is the average
    of the two edge endpoints; parents always have smaller vertex ids.
    """
    forest = fine.forest
    values = np.full(forest.n_vertices, np.nan)
    values[coarse.vertex_ids] = U
    parents = forest.vertex_parents
    for vid in fine.vertex_ids:
        if np.isnan(values[vid]):
            a, b = parents[int(vid)]
            values[vid] = 0.5 * (values[a] + values[b])
    return values[fine.vertex_ids]
