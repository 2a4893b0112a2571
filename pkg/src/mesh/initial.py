"""
Initial partitions T0 of the benchmark domains.

All triangles are right isosceles with the newest vertex at the right-angle
corner, so every refinement edge is a hypotenuse and the labeling is
compatible.
"""
from pydantic import BaseModel, Field

from src.mesh.forest import MeshForest, load_initial


class MeshData(BaseModel):
    """Plain vertex/triangle description of a mesh."""
    vertices: list[tuple[float, float]]
    triangles: list[tuple[int, int, int]]
    labels: list[int] = Field(default_factory=list)
    boundary_flags: list[bool] = Field(default_factory=list)

    def to_forest(self, strict: bool = True) -> MeshForest:
        return load_initial(self.vertices, self.triangles, self.labels or None, strict=strict)


def unit_square() -> MeshData:
    """(0,1)^2 as two triangles sharing the diagonal (0,0)-(1,1)."""
    return MeshData(
        vertices=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        triangles=[(1, 2, 0), (3, 0, 2)],
    )


def lshape(half_width: float = 5.0) -> MeshData:
    """
    [-a,a]^2 without the quadrant [0,a]^2, as 6 right triangles.

    Each of the three squares is split by its diagonal through the reentrant
    corner (0, 0).
    """
    a = float(half_width)
    vertices = [
        (0.0, 0.0),   # 0 reentrant corner
        (0.0, a),     # 1
        (-a, a),      # 2
        (-a, 0.0),    # 3
        (-a, -a),     # 4
        (0.0, -a),    # 5
        (a, -a),      # 6
        (a, 0.0),     # 7
    ]
    triangles = [
        (1, 2, 0), (3, 0, 2),   # upper-left square, diagonal 0-2
        (3, 4, 0), (5, 0, 4),   # lower-left square, diagonal 0-4
        (5, 6, 0), (7, 0, 6),   # lower-right square, diagonal 0-6
    ]
    return MeshData(vertices=vertices, triangles=triangles)


def centered_square(half_width: float = 1.0) -> MeshData:
    """[-a,a]^2 as 8 right triangles, diagonals through the centre."""
    a = float(half_width)
    vertices = [
        (0.0, 0.0),
        (a, 0.0), (a, a), (0.0, a), (-a, a),
        (-a, 0.0), (-a, -a), (0.0, -a), (a, -a),
    ]
    triangles = [
        (1, 2, 0), (3, 0, 2),   # first quadrant
        (3, 4, 0), (5, 0, 4),   # second
        (5, 6, 0), (7, 0, 6),   # third
        (7, 8, 0), (1, 0, 8),   # fourth
    ]
    return MeshData(vertices=vertices, triangles=triangles)
