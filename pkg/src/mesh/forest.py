"""
Newest-vertex-bisection forest over a polygonal domain.

Each element is stored as a vertex triple (v0, v1, v2) with the newest vertex
at position 0, so its refinement edge is (v1, v2). Bisection inserts the
midpoint m of (v1, v2) and creates the children (m, v0, v1) and (m, v2, v0);
both keep the parent's orientation and have m as newest vertex.

The current partition is the set of active leaves. Midpoints are shared
through an edge -> midpoint map, so vertex identity never depends on
floating-point comparisons.
"""
import copy
from collections import deque
from typing import Iterable, Optional, Sequence

import numpy as np
import structlog

from src.core.errors import (
    DegenerateElementError,
    IncompatibleLabelingError,
    InactiveElementError,
    MeshError,
)

logger = structlog.get_logger()

Edge = tuple[int, int]


def edge_key(a: int, b: int) -> Edge:
    """Orientation-free key of the edge (a, b)."""
    return (a, b) if a < b else (b, a)


class MeshForest:
    """
    Binary forest of triangles emanating from the initial partition T0.

    Use `load_initial` to build one; the constructor only sets up empty
    storage.
    """

    def __init__(self, vertex_capacity: int = 1024, element_capacity: int = 2048):
        # Vertex table
        self._xy = np.empty((vertex_capacity, 2), dtype=float)
        self._on_boundary = np.zeros(vertex_capacity, dtype=bool)
        self._nv = 0
        self._vertex_parents: dict[int, Edge] = {}
        self._midpoint: dict[Edge, int] = {}
        self._boundary_edges: set[Edge] = set()

        # Element arena
        self._ev = np.empty((element_capacity, 3), dtype=np.int64)
        self._generation = np.empty(element_capacity, dtype=np.int64)
        self._parent = np.empty(element_capacity, dtype=np.int64)
        self._children = np.empty((element_capacity, 2), dtype=np.int64)
        self._root_index = np.empty(element_capacity, dtype=np.int64)
        self._path: list[int] = []
        self._ne = 0

        # Current partition
        self._active: set[int] = set()
        self._active_cache: Optional[np.ndarray] = None
        self._edge_elements: dict[Edge, set[int]] = {}
        self._pending: set[int] = set()

        self.roots: list[int] = []
        self.domain_area = 0.0
        self.n_bisections = 0
        self.n_marked_bisections = 0
        self.n_closure_bisections = 0

    # ===========================================
    # Storage
    # ===========================================

    def _grow_vertices(self):
        cap = 2 * self._xy.shape[0]
        xy = np.empty((cap, 2), dtype=float)
        xy[:self._nv] = self._xy[:self._nv]
        flags = np.zeros(cap, dtype=bool)
        flags[:self._nv] = self._on_boundary[:self._nv]
        self._xy, self._on_boundary = xy, flags

    def _grow_elements(self):
        cap = 2 * self._ev.shape[0]
        for name, shape in (
            ("_ev", (cap, 3)),
            ("_generation", (cap,)),
            ("_parent", (cap,)),
            ("_children", (cap, 2)),
            ("_root_index", (cap,)),
        ):
            old = getattr(self, name)
            new = np.empty(shape, dtype=old.dtype)
            new[:self._ne] = old[:self._ne]
            setattr(self, name, new)

    def _add_vertex(self, x: float, y: float, on_boundary: bool) -> int:
        if self._nv == self._xy.shape[0]:
            self._grow_vertices()
        vid = self._nv
        self._xy[vid] = (x, y)
        self._on_boundary[vid] = on_boundary
        self._nv += 1
        return vid

    def _add_element(
        self,
        vertices: tuple[int, int, int],
        generation: int,
        parent: int,
        root_index: int,
        path: int
    ) -> int:
        if self._ne == self._ev.shape[0]:
            self._grow_elements()
        eid = self._ne
        self._ev[eid] = vertices
        self._generation[eid] = generation
        self._parent[eid] = parent
        self._children[eid] = (-1, -1)
        self._root_index[eid] = root_index
        self._path.append(path)
        self._ne += 1
        self._activate(eid)
        return eid

    def _element_edges(self, eid: int) -> tuple[Edge, Edge, Edge]:
        v0, v1, v2 = (int(v) for v in self._ev[eid])
        return edge_key(v1, v2), edge_key(v2, v0), edge_key(v0, v1)

    def _activate(self, eid: int):
        self._active.add(eid)
        self._active_cache = None
        for key in self._element_edges(eid):
            self._edge_elements.setdefault(key, set()).add(eid)

    def _deactivate(self, eid: int):
        self._active.discard(eid)
        self._active_cache = None
        for key in self._element_edges(eid):
            owners = self._edge_elements.get(key)
            if owners is not None:
                owners.discard(eid)
                if not owners:
                    del self._edge_elements[key]

    def _midpoint_vertex(self, a: int, b: int) -> int:
        key = edge_key(a, b)
        vid = self._midpoint.get(key)
        if vid is not None:
            return vid
        on_boundary = key in self._boundary_edges
        x = 0.5 * (self._xy[a, 0] + self._xy[b, 0])
        y = 0.5 * (self._xy[a, 1] + self._xy[b, 1])
        vid = self._add_vertex(x, y, on_boundary)
        self._midpoint[key] = vid
        self._vertex_parents[vid] = key
        if on_boundary:
            self._boundary_edges.add(edge_key(a, vid))
            self._boundary_edges.add(edge_key(vid, b))
        return vid

    # ===========================================
    # Queries
    # ===========================================

    @property
    def n_vertices(self) -> int:
        return self._nv

    @property
    def n_active(self) -> int:
        return len(self._active)

    @property
    def coordinates(self) -> np.ndarray:
        """Vertex coordinates, shape (n_vertices, 2)."""
        return self._xy[:self._nv]

    @property
    def boundary_flags(self) -> np.ndarray:
        return self._on_boundary[:self._nv]

    @property
    def vertex_parents(self) -> dict[int, Edge]:
        """Midpoint vertex -> endpoints of the edge it bisects."""
        return self._vertex_parents

    def active_elements(self) -> np.ndarray:
        """Sorted ids of the current partition."""
        if self._active_cache is None:
            self._active_cache = np.fromiter(sorted(self._active), dtype=np.int64, count=len(self._active))
        return self._active_cache

    def element_vertices(self, ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Vertex triples (newest vertex first), shape (m, 3)."""
        ids = self.active_elements() if ids is None else np.asarray(ids, dtype=np.int64)
        return self._ev[ids]

    def element_coords(self, ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Corner coordinates, shape (m, 3, 2)."""
        return self.coordinates[self.element_vertices(ids)]

    def areas(self, ids: Optional[Sequence[int]] = None) -> np.ndarray:
        return triangle_areas(self.element_coords(ids))

    def diameters(self, ids: Optional[Sequence[int]] = None) -> np.ndarray:
        return triangle_diameters(self.element_coords(ids))

    def generation(self, eid: int) -> int:
        return int(self._generation[eid])

    def parent(self, eid: int) -> Optional[int]:
        p = int(self._parent[eid])
        return None if p < 0 else p

    def children(self, eid: int) -> Optional[tuple[int, int]]:
        c1, c2 = (int(c) for c in self._children[eid])
        return None if c1 < 0 else (c1, c2)

    def label(self, eid: int) -> tuple[int, int, int]:
        """History-independent lexicographic label (root, generation, path code)."""
        return int(self._root_index[eid]), int(self._generation[eid]), self._path[eid]

    def labels(self, ids: Sequence[int]) -> list[tuple[int, int, int]]:
        return [self.label(int(i)) for i in ids]

    def ancestor_in(self, eid: int, members: set[int]) -> Optional[int]:
        """First of eid and its ancestors that belongs to `members`."""
        node = eid
        while node >= 0:
            if node in members:
                return node
            node = int(self._parent[node])
        return None

    def ancestor_positions(self, coarse: Sequence[int], fine: Sequence[int]) -> np.ndarray:
        """
        For each element of `fine`, the position in `coarse` of the element
        containing it (itself or an ancestor).

        Raises:
            MeshError: some element of `fine` is not inside `coarse`
        """
        index_of = np.full(self._ne, -1, dtype=np.int64)
        index_of[np.asarray(coarse, dtype=np.int64)] = np.arange(len(coarse))
        current = np.asarray(fine, dtype=np.int64).copy()
        positions = np.full(len(current), -1, dtype=np.int64)
        pending = np.arange(len(current))
        while pending.size:
            found = index_of[current[pending]]
            hit = found >= 0
            positions[pending[hit]] = found[hit]
            pending = pending[~hit]
            current[pending] = self._parent[current[pending]]
            if np.any(current[pending] < 0):
                raise MeshError("Partition is not a refinement of the field's partition")
        return positions

    def is_refinement(self, fine: Iterable[int], coarse: Iterable[int]) -> bool:
        """True when every element of `fine` lies inside an element of `coarse`."""
        coarse_set = set(int(c) for c in coarse)
        return all(self.ancestor_in(int(e), coarse_set) is not None for e in fine)

    def hanging_edges(self, eid: int) -> list[Edge]:
        """Edges of an active element that were bisected from the other side."""
        return [key for key in self._element_edges(eid) if key in self._midpoint]

    def is_conforming(self) -> bool:
        return not any(self.hanging_edges(eid) for eid in self._active)

    def hanging_nodes(self) -> list[int]:
        """Midpoint vertices that sit on an unrefined edge of an active element."""
        nodes = set()
        for eid in self._active:
            for key in self.hanging_edges(eid):
                nodes.add(self._midpoint[key])
        return sorted(nodes)

    def is_boundary_edge(self, a: int, b: int) -> bool:
        return edge_key(a, b) in self._boundary_edges

    def closure_overhead(self) -> float:
        """(#T - #T0) / n_marked, the measured constant of the closure bound."""
        if self.n_marked_bisections == 0:
            return 0.0
        return (self.n_active - len(self.roots)) / self.n_marked_bisections

    def copy(self) -> "MeshForest":
        return copy.deepcopy(self)

    # ===========================================
    # Refinement
    # ===========================================

    def _bisect(self, eid: int) -> tuple[int, int]:
        if eid not in self._active:
            raise InactiveElementError(f"Element {eid} is not active", {"element": eid})

        v0, v1, v2 = (int(v) for v in self._ev[eid])
        m = self._midpoint_vertex(v1, v2)

        self._deactivate(eid)
        generation = int(self._generation[eid]) + 1
        root_index = int(self._root_index[eid])
        path = self._path[eid]
        c1 = self._add_element((m, v0, v1), generation, eid, root_index, 2 * path)
        c2 = self._add_element((m, v2, v0), generation, eid, root_index, 2 * path + 1)
        self._children[eid] = (c1, c2)
        self.n_bisections += 1

        neighbours = self._edge_elements.get(edge_key(v1, v2))
        if neighbours:
            self._pending.update(neighbours)
        return c1, c2

    def bisect(self, eid: int) -> tuple[int, int]:
        """Bisect an active element across its refinement edge."""
        children = self._bisect(int(eid))
        self.n_marked_bisections += 1
        return children

    def refine_marked(self, marked: Iterable[int]) -> np.ndarray:
        """
        Bisect each marked element exactly once.

        The result may be non-conforming; call `conforming_closure` afterwards.

        Args:
            marked: Active element ids (duplicates are ignored)

        Returns:
            Sorted ids of the new partition
        """
        ids = sorted(set(int(e) for e in marked))
        inactive = [e for e in ids if e not in self._active]
        if inactive:
            raise InactiveElementError(
                f"Cannot refine {len(inactive)} inactive element(s)",
                {"elements": inactive[:10]}
            )
        for eid in ids:
            self.bisect(eid)
        return self.active_elements()

    def conforming_closure(self) -> np.ndarray:
        """
        Remove all hanging nodes by additional bisections.

        Work queue over elements that may carry a hanging node; each one with
        a bisected edge is bisected until the edge is split.

        Returns:
            Sorted ids of the new (conforming) partition
        """
        queue = deque(sorted(self._pending))
        self._pending.clear()
        closure_count = 0

        while queue:
            eid = queue.popleft()
            if eid not in self._active:
                kids = self.children(eid)
                if kids is not None:
                    queue.extend(kids)
                continue
            if not self.hanging_edges(eid):
                continue
            c1, c2 = self._bisect(eid)
            closure_count += 1
            queue.append(c1)
            queue.append(c2)
            if self._pending:
                queue.extend(sorted(self._pending))
                self._pending.clear()

        self.n_closure_bisections += closure_count
        if closure_count:
            logger.debug("Conforming closure", bisections=closure_count, elements=self.n_active)
        return self.active_elements()

    def refine_uniform(self, times: int = 1) -> np.ndarray:
        """Bisect every element `times` times, closing after each sweep."""
        for _ in range(times):
            self.refine_marked(self.active_elements())
            self.conforming_closure()
        return self.active_elements()

    # ===========================================
    # Partitions
    # ===========================================

    def _validate_partition(self, ids: Sequence[int], name: str) -> set[int]:
        members = set(int(e) for e in ids)
        bad = [e for e in members if e < 0 or e >= self._ne]
        if bad:
            raise MeshError(f"Partition {name} references unknown elements", {"elements": bad[:10]})
        total = float(self.areas(sorted(members)).sum()) if members else 0.0
        if abs(total - self.domain_area) > 1e-10 * self.domain_area:
            raise MeshError(
                f"Partition {name} does not cover the domain",
                {"area": total, "domain_area": self.domain_area}
            )
        return members

    def overlay(self, partition_a: Sequence[int], partition_b: Sequence[int]) -> np.ndarray:
        """
        Smallest common refinement of two partitions of this forest.

        Args:
            partition_a: Element ids of the first partition
            partition_b: Element ids of the second partition

        Returns:
            Sorted element ids of the overlay
        """
        union = self._validate_partition(partition_a, "a") | self._validate_partition(partition_b, "b")
        proper_ancestors: set[int] = set()
        for eid in union:
            node = int(self._parent[eid])
            while node >= 0 and node not in proper_ancestors:
                proper_ancestors.add(node)
                node = int(self._parent[node])
        return np.array(sorted(union - proper_ancestors), dtype=np.int64)


# ===========================================
# Construction
# ===========================================

def load_initial(
    vertices: Sequence[Sequence[float]],
    triangles: Sequence[Sequence[int]],
    labels: Optional[Sequence[int]] = None,
    strict: bool = True
) -> MeshForest:
    """
    Build a forest whose roots are the given initial triangles.

    Args:
        vertices: (x, y) pairs
        triangles: Vertex index triples, positively oriented
        labels: Position (0, 1 or 2) of the newest vertex in each triple;
            defaults to 0 for every triangle
        strict: Enforce the refinement-edge pairing condition

    Returns:
        MeshForest with roots = T0

    Raises:
        DegenerateElementError: zero-area or negatively oriented triangle
        MeshError: non-conforming input mesh
        IncompatibleLabelingError: refinement edges do not pair up
    """
    xy = np.asarray(vertices, dtype=float).reshape(-1, 2)
    tris = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    if labels is None:
        labels = [0] * len(tris)
    if len(labels) != len(tris):
        raise MeshError("One label per triangle is required", {"labels": len(labels), "triangles": len(tris)})
    if len(tris) == 0:
        raise MeshError("Initial mesh has no triangles")
    if tris.min() < 0 or tris.max() >= len(xy):
        raise MeshError("Triangle references an unknown vertex")
    if not np.all(np.isfinite(xy)):
        raise MeshError("Vertex coordinates must be finite")

    rotated = []
    for tri, label in zip(tris, labels):
        if label not in (0, 1, 2):
            raise MeshError(f"Newest-vertex label must be 0, 1 or 2, got {label}")
        rotated.append(tuple(int(tri[(label + k) % 3]) for k in range(3)))
    tris = np.array(rotated, dtype=np.int64)

    signed = signed_areas(xy[tris])
    scale = max(float(np.abs(xy).max()), 1.0) ** 2
    degenerate = np.nonzero(signed <= 1e-14 * scale)[0]
    if degenerate.size:
        raise DegenerateElementError(
            "Initial triangles must have positive area and orientation",
            {"triangles": degenerate[:10].tolist()}
        )

    # Edge -> adjacent triangles
    owners: dict[Edge, list[int]] = {}
    for t, (v0, v1, v2) in enumerate(tris.tolist()):
        for a, b in ((v1, v2), (v2, v0), (v0, v1)):
            owners.setdefault(edge_key(a, b), []).append(t)

    overfull = [e for e, ts in owners.items() if len(ts) > 2]
    if overfull:
        raise MeshError("Edge shared by more than two triangles", {"edges": overfull[:10]})

    boundary = [e for e, ts in owners.items() if len(ts) == 1]
    for a, b in boundary:
        if _vertices_inside_segment(xy, a, b):
            raise MeshError("Hanging vertex on an initial edge (non-conforming input)", {"edge": (a, b)})

    if strict:
        for key, ts in owners.items():
            if len(ts) != 2:
                continue
            is_ref = [edge_key(int(tris[t, 1]), int(tris[t, 2])) == key for t in ts]
            if is_ref[0] != is_ref[1]:
                raise IncompatibleLabelingError(
                    "Refinement edge of one triangle is not the refinement edge of its neighbour",
                    {"edge": key, "triangles": ts}
                )

    forest = MeshForest(
        vertex_capacity=max(1024, 4 * len(xy)),
        element_capacity=max(2048, 8 * len(tris))
    )
    on_boundary = np.zeros(len(xy), dtype=bool)
    for a, b in boundary:
        on_boundary[a] = on_boundary[b] = True
    for (x, y), flag in zip(xy, on_boundary):
        forest._add_vertex(float(x), float(y), bool(flag))
    forest._boundary_edges = set(boundary)

    for index, tri in enumerate(tris.tolist()):
        forest.roots.append(forest._add_element(tuple(tri), 0, -1, index, 0))
    forest.domain_area = float(signed.sum())

    logger.info(
        "Initial partition loaded",
        vertices=len(xy),
        triangles=len(tris),
        boundary_edges=len(boundary),
        area=forest.domain_area
    )
    return forest


def _vertices_inside_segment(xy: np.ndarray, a: int, b: int) -> bool:
    pa, pb = xy[a], xy[b]
    d = pb - pa
    length2 = float(d @ d)
    rel = xy - pa
    cross = d[0] * rel[:, 1] - d[1] * rel[:, 0]
    t = (rel @ d) / length2
    inside = (np.abs(cross) <= 1e-12 * length2) & (t > 1e-12) & (t < 1 - 1e-12)
    return bool(inside.any())


# ===========================================
# Geometry
# ===========================================

def signed_areas(corners: np.ndarray) -> np.ndarray:
    """Signed areas of triangles given as (m, 3, 2) corner arrays."""
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def triangle_areas(corners: np.ndarray) -> np.ndarray:
    return np.abs(signed_areas(corners))


def edge_lengths(corners: np.ndarray) -> np.ndarray:
    """Lengths of the edges opposite each corner, shape (m, 3)."""
    opposite = np.stack([
        corners[:, 2] - corners[:, 1],
        corners[:, 0] - corners[:, 2],
        corners[:, 1] - corners[:, 0],
    ], axis=1)
    return np.linalg.norm(opposite, axis=2)


def triangle_diameters(corners: np.ndarray) -> np.ndarray:
    return edge_lengths(corners).max(axis=1)


def min_angles(corners: np.ndarray) -> np.ndarray:
    """Smallest interior angle of each triangle, in radians."""
    lengths = edge_lengths(corners)
    a, b, c = lengths[:, 0], lengths[:, 1], lengths[:, 2]
    angles = np.stack([
        np.arccos(np.clip((b ** 2 + c ** 2 - a ** 2) / (2 * b * c), -1.0, 1.0)),
        np.arccos(np.clip((c ** 2 + a ** 2 - b ** 2) / (2 * c * a), -1.0, 1.0)),
        np.arccos(np.clip((a ** 2 + b ** 2 - c ** 2) / (2 * a * b), -1.0, 1.0)),
    ], axis=1)
    return angles.min(axis=1)


def similarity_min_angle(forest: MeshForest, generations: int = 3) -> float:
    """
    Smallest angle over the NVB similarity classes of the roots.

    Descendants of a root fall into at most four similarity classes, all of
    which appear within the first few generations.
    """
    level = forest.element_coords(forest.roots)
    smallest = float(min_angles(level).min())
    for _ in range(generations):
        m = 0.5 * (level[:, 1] + level[:, 2])
        first = np.stack([m, level[:, 0], level[:, 1]], axis=1)
        second = np.stack([m, level[:, 2], level[:, 0]], axis=1)
        level = np.concatenate([first, second])
        smallest = min(smallest, float(min_angles(level).min()))
    return smallest
