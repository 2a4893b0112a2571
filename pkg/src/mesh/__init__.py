"""Newest-vertex-bisection meshes."""
from .forest import MeshForest, load_initial, similarity_min_angle
from .initial import MeshData, centered_square, lshape, unit_square
from .io import read_mesh, write_mesh
from .topology import Topology, boundary_edges, build_topology, interior_edges

__all__ = [
    "MeshForest",
    "load_initial",
    "similarity_min_angle",
    "MeshData",
    "unit_square",
    "lshape",
    "centered_square",
    "read_mesh",
    "write_mesh",
    "Topology",
    "build_topology",
    "boundary_edges",
    "interior_edges",
]
