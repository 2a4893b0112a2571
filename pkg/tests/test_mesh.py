"""
Tests for the newest-vertex-bisection forest.
"""
import math

import numpy as np
import pytest

from src.core.errors import (
    DegenerateElementError,
    IncompatibleLabelingError,
    InactiveElementError,
    MeshError,
    NonConformingError,
)
from src.mesh import (
    build_topology,
    interior_edges,
    load_initial,
    read_mesh,
    similarity_min_angle,
    unit_square,
    write_mesh,
)
from src.mesh.forest import min_angles
from src.mesh.io import parse_mesh


UNIT_SQUARE_VERTICES = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
MAX_CLOSURE_OVERHEAD = 10.0


# ===========================================
# Initial partition
# ===========================================

def test_load_unit_square(square_forest):
    assert square_forest.n_active == 2
    assert square_forest.domain_area == pytest.approx(1.0)
    assert square_forest.is_conforming()
    assert square_forest.boundary_flags.all()
    assert [square_forest.label(r) for r in square_forest.roots] == [(0, 0, 0), (1, 0, 0)]


def test_labels_rotate_newest_vertex():
    forest = load_initial(UNIT_SQUARE_VERTICES, [(0, 1, 2), (2, 3, 0)], labels=[1, 1])
    assert forest.element_vertices().tolist() == [[1, 2, 0], [3, 0, 2]]


def test_incompatible_labeling_rejected():
    with pytest.raises(IncompatibleLabelingError):
        load_initial(UNIT_SQUARE_VERTICES, [(1, 2, 0), (0, 2, 3)])


def test_incompatible_labeling_allowed_when_not_strict():
    forest = load_initial(UNIT_SQUARE_VERTICES, [(1, 2, 0), (0, 2, 3)], strict=False)
    assert forest.n_active == 2


@pytest.mark.parametrize("triangles", [
    [(0, 2, 1)],                    # clockwise
    [(0, 1, 1)],                    # repeated vertex
])
def test_degenerate_or_inverted_rejected(triangles):
    with pytest.raises(DegenerateElementError):
        load_initial(UNIT_SQUARE_VERTICES, triangles)


def test_hanging_vertex_in_input_rejected():
    vertices = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.0), (0.5, -1.0)]
    with pytest.raises(MeshError):
        load_initial(vertices, [(0, 1, 2), (3, 4, 1)], strict=False)


def test_unknown_vertex_rejected():
    with pytest.raises(MeshError):
        load_initial(UNIT_SQUARE_VERTICES, [(0, 1, 7)])


# ===========================================
# Bisection and closure
# ===========================================

def test_bisect_children(square_forest):
    c1, c2 = square_forest.bisect(0)
    m = square_forest.n_vertices - 1
    assert square_forest.coordinates[m].tolist() == [0.5, 0.5]
    assert square_forest.element_vertices([c1, c2]).tolist() == [[m, 1, 2], [m, 0, 1]]
    assert square_forest.label(c1) == (0, 1, 0)
    assert square_forest.label(c2) == (0, 1, 1)
    assert square_forest.parent(c1) == 0
    assert square_forest.children(0) == (c1, c2)
    assert square_forest.areas([c1, c2]).tolist() == [0.25, 0.25]
    assert not square_forest.boundary_flags[m]


def test_closure_removes_hanging_node(square_forest):
    square_forest.bisect(0)
    assert not square_forest.is_conforming()
    assert square_forest.hanging_nodes() == [4]
    with pytest.raises(NonConformingError):
        interior_edges(square_forest)

    partition = square_forest.conforming_closure()
    assert len(partition) == 4
    assert square_forest.is_conforming()
    assert square_forest.n_closure_bisections == 1
    assert square_forest.n_marked_bisections == 1


def test_refine_inactive_element_raises(square_forest):
    square_forest.bisect(0)
    with pytest.raises(InactiveElementError):
        square_forest.refine_marked([0])


def test_refine_uniform_counts(square_forest):
    assert len(square_forest.refine_uniform(1)) == 4
    partition = square_forest.refine_uniform(1)
    assert len(partition) == 8
    np.testing.assert_allclose(square_forest.areas(partition), 1.0 / 8.0)
    assert square_forest.is_conforming()


def test_boundary_midpoints_are_flagged(square_forest):
    square_forest.refine_uniform(2)
    xy = square_forest.coordinates
    on_boundary = (np.isclose(xy[:, 0], 0) | np.isclose(xy[:, 0], 1)
                   | np.isclose(xy[:, 1], 0) | np.isclose(xy[:, 1], 1))
    np.testing.assert_array_equal(square_forest.boundary_flags, on_boundary)


def test_random_refinement_fuzz(lshape_forest, rng):
    """Closure keeps conformity, area, idempotence and nestedness at every step."""
    forest = lshape_forest
    previous = forest.active_elements().copy()
    for _ in range(500):
        active = forest.active_elements()
        marked = rng.choice(active, size=min(len(active), int(rng.integers(1, 4))), replace=False)
        forest.refine_marked(marked)
        partition = forest.conforming_closure().copy()

        assert forest.is_conforming()
        assert forest.areas(partition).sum() == pytest.approx(forest.domain_area, rel=1e-12)
        np.testing.assert_array_equal(forest.conforming_closure(), partition)
        assert forest.is_refinement(partition, previous)
        previous = partition

    # every bisection adds one element; closure work stays proportional to marking
    assert forest.n_active == len(forest.roots) + forest.n_bisections
    assert forest.n_bisections == forest.n_marked_bisections + forest.n_closure_bisections
    assert 1.0 <= forest.closure_overhead() <= MAX_CLOSURE_OVERHEAD


@pytest.mark.parametrize("fixture", ["square_forest", "lshape_forest"])
def test_euler_relation_after_every_closure(request, rng, fixture):
    forest = request.getfixturevalue(fixture)
    for _ in range(60):
        active = forest.active_elements()
        forest.refine_marked(rng.choice(active, size=min(len(active), 2), replace=False))
        forest.conforming_closure()

        n_vertices = len(np.unique(forest.element_vertices()))
        assert n_vertices - build_topology(forest).n_edges + forest.n_active == 1
        assert forest.n_active == len(forest.roots) + forest.n_bisections


def test_labels_do_not_depend_on_history():
    first = unit_square().to_forest()
    second = unit_square().to_forest()
    for eid in (0, 1):
        first.bisect(eid)
    for eid in (1, 0):
        second.bisect(eid)
    first.refine_uniform(2)
    second.refine_uniform(2)
    assert sorted(first.labels(first.active_elements())) == sorted(second.labels(second.active_elements()))


def test_shape_regularity(lshape_forest):
    assert similarity_min_angle(lshape_forest) == pytest.approx(math.pi / 4)
    lshape_forest.refine_uniform(4)
    assert min_angles(lshape_forest.element_coords()).min() >= math.pi / 4 - 1e-12


# ===========================================
# Partitions
# ===========================================

def test_overlay_of_unnested_partitions(square_forest):
    a1, a2 = square_forest.bisect(0)
    b1, b2 = square_forest.bisect(1)
    overlay = square_forest.overlay([a1, a2, 1], [0, b1, b2])
    assert overlay.tolist() == sorted([a1, a2, b1, b2])


def random_tree_partition(forest, rng, descend: float = 0.7) -> list[int]:
    """Cut the refinement tree at random: stop at a node or descend into its children."""
    partition = []
    stack = [int(r) for r in forest.roots]
    while stack:
        node = stack.pop()
        kids = forest.children(node)
        if kids is not None and rng.random() < descend:
            stack.extend(kids)
        else:
            partition.append(node)
    return partition


def test_overlay_cardinality_on_random_pairs(lshape_forest, rng):
    forest = lshape_forest
    for _ in range(40):
        active = forest.active_elements()
        forest.refine_marked(rng.choice(active, size=min(len(active), 3), replace=False))
        forest.conforming_closure()
    n_roots = len(forest.roots)

    for _ in range(30):
        first = random_tree_partition(forest, rng)
        second = random_tree_partition(forest, rng)
        overlay = forest.overlay(first, second)

        assert len(overlay) <= len(first) + len(second) - n_roots
        assert forest.is_refinement(overlay, first)
        assert forest.is_refinement(overlay, second)
        assert forest.areas(overlay).sum() == pytest.approx(forest.domain_area, rel=1e-12)


def test_overlay_rejects_non_covering(square_forest):
    with pytest.raises(MeshError):
        square_forest.overlay([0], [0, 1])


def test_ancestor_positions(square_forest):
    square_forest.refine_uniform(2)
    fine = square_forest.active_elements()
    positions = square_forest.ancestor_positions(square_forest.roots, fine)
    assert set(positions.tolist()) == {0, 1}
    with pytest.raises(MeshError):
        square_forest.ancestor_positions([0], fine)


def test_topology_counts(square_forest):
    topology = build_topology(square_forest)
    assert len(topology.interior) == 1
    assert len(topology.boundary) == 4
    assert topology.n_edges == 5
    assert topology.is_conforming


# ===========================================
# Text format
# ===========================================

def test_mesh_file_round_trip(tmp_path, lshape_forest):
    lshape_forest.refine_uniform(2)
    path = write_mesh(tmp_path / "mesh.txt", lshape_forest)
    mesh = read_mesh(path)
    assert len(mesh.triangles) == lshape_forest.n_active
    assert sum(mesh.boundary_flags) == int(lshape_forest.boundary_flags[np.unique(lshape_forest.element_vertices())].sum())
    reloaded = mesh.to_forest(strict=False)
    assert reloaded.domain_area == pytest.approx(lshape_forest.domain_area)


def test_parse_rejects_bad_header():
    with pytest.raises(MeshError):
        parse_mesh("mesh v0\nV 0\nT 0\n")
