"""
Edge adjacency of a partition.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.errors import MeshError, NonConformingError
from src.mesh.forest import MeshForest

# Local edge i of an element is the edge opposite its vertex i
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])


@dataclass
class InteriorEdges:
    """Interior edges with their two adjacent elements."""
    vertices: np.ndarray   # (k, 2) vertex ids, sorted per row
    elements: np.ndarray   # (k, 2) positions into the partition array
    local: np.ndarray      # (k, 2) local edge index within each element

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class BoundaryEdges:
    """Boundary edges with their single adjacent element."""
    vertices: np.ndarray   # (k, 2)
    elements: np.ndarray   # (k,)
    local: np.ndarray      # (k,)

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class Topology:
    """Edge classification of one partition."""
    partition: np.ndarray
    interior: InteriorEdges
    boundary: BoundaryEdges
    hanging: np.ndarray     # (k, 2) vertex ids of edges with a hanging node

    @property
    def is_conforming(self) -> bool:
        return len(self.hanging) == 0

    @property
    def n_edges(self) -> int:
        return len(self.interior) + len(self.boundary) + len(self.hanging)


def build_topology(forest: MeshForest, partition: Optional[Sequence[int]] = None) -> Topology:
    """
    Classify the edges of a partition.

    Args:
        forest: Mesh forest
        partition: Element ids (default: the active partition)

    Returns:
        Topology with interior, boundary and hanging edges
    """
    ids = forest.active_elements() if partition is None else np.asarray(partition, dtype=np.int64)
    ev = forest.element_vertices(ids)
    m = len(ids)

    pairs = ev[:, LOCAL_EDGES]                  # (m, 3, 2)
    pairs = np.sort(pairs, axis=2).reshape(-1, 2)
    owner = np.repeat(np.arange(m), 3)
    local = np.tile(np.arange(3), m)

    n_vertices = forest.n_vertices
    codes = pairs[:, 0] * n_vertices + pairs[:, 1]
    order = np.argsort(codes, kind="stable")
    codes, pairs, owner, local = codes[order], pairs[order], owner[order], local[order]
    unique, start, counts = np.unique(codes, return_index=True, return_counts=True)

    if np.any(counts > 2):
        raise MeshError("Edge shared by more than two elements", {"edges": int(np.sum(counts > 2))})

    double = start[counts == 2]
    interior = InteriorEdges(
        vertices=pairs[double],
        elements=np.stack([owner[double], owner[double + 1]], axis=1),
        local=np.stack([local[double], local[double + 1]], axis=1),
    )

    single = start[counts == 1]
    on_boundary = np.array(
        [forest.is_boundary_edge(int(a), int(b)) for a, b in pairs[single]],
        dtype=bool
    ) if len(single) else np.zeros(0, dtype=bool)
    b_idx = single[on_boundary]
    boundary = BoundaryEdges(vertices=pairs[b_idx], elements=owner[b_idx], local=local[b_idx])

    return Topology(
        partition=ids,
        interior=interior,
        boundary=boundary,
        hanging=pairs[single[~on_boundary]],
    )


def boundary_edges(forest: MeshForest, partition: Optional[Sequence[int]] = None) -> BoundaryEdges:
    """Edges of the partition lying on the domain boundary."""
    return build_topology(forest, partition).boundary


def interior_edges(forest: MeshForest, partition: Optional[Sequence[int]] = None) -> InteriorEdges:
    """
    Interior edges of a conforming partition.

    Raises:
        NonConformingError: the partition has hanging nodes
    """
    topology = build_topology(forest, partition)
    if not topology.is_conforming:
        raise NonConformingError(
            "Interior edges require a conforming partition",
            {"hanging_edges": len(topology.hanging)}
        )
    return topology.interior
