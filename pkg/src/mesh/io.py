"""
Text mesh format.

    nvb-mesh v1
    V <count>
    x y boundary_flag
    T <count>
    v0 v1 v2            (v0 = newest vertex)

Coordinates are written with repr() so dyadic values read back bit-exactly.
"""
from pathlib import Path
from typing import Union

import numpy as np
import structlog

from src.core.errors import MeshError
from src.mesh.forest import MeshForest
from src.mesh.initial import MeshData

logger = structlog.get_logger()

HEADER = "nvb-mesh v1"


def partition_mesh(forest: MeshForest) -> MeshData:
    """Compact vertex/triangle description of the active partition."""
    ev = forest.element_vertices()
    used = np.unique(ev)
    index = np.full(forest.n_vertices, -1, dtype=np.int64)
    index[used] = np.arange(len(used))
    xy = forest.coordinates[used]
    flags = forest.boundary_flags[used]
    return MeshData(
        vertices=[(float(x), float(y)) for x, y in xy],
        triangles=[tuple(int(v) for v in row) for row in index[ev]],
        boundary_flags=[bool(f) for f in flags],
    )


def format_mesh(mesh: MeshData) -> str:
    flags = mesh.boundary_flags or [False] * len(mesh.vertices)
    lines = [HEADER, f"V {len(mesh.vertices)}"]
    lines += [f"{x!r} {y!r} {int(flag)}" for (x, y), flag in zip(mesh.vertices, flags)]
    lines.append(f"T {len(mesh.triangles)}")
    lines += [f"{a} {b} {c}" for a, b, c in mesh.triangles]
    return "\n".join(lines) + "\n"


def parse_mesh(text: str) -> MeshData:
    """
    Parse the text mesh format.

    Raises:
        MeshError: malformed content
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != HEADER:
        raise MeshError(f"Expected header '{HEADER}'")
    try:
        pos = 1
        tag, count = lines[pos].split()
        if tag != "V":
            raise MeshError("Expected vertex section")
        n_vertices = int(count)
        vertices, flags = [], []
        for line in lines[pos + 1:pos + 1 + n_vertices]:
            x, y, flag = line.split()
            vertices.append((float(x), float(y)))
            flags.append(flag == "1")
        pos += 1 + n_vertices

        tag, count = lines[pos].split()
        if tag != "T":
            raise MeshError("Expected triangle section")
        n_triangles = int(count)
        triangles = []
        for line in lines[pos + 1:pos + 1 + n_triangles]:
            a, b, c = line.split()
            triangles.append((int(a), int(b), int(c)))
    except (ValueError, IndexError) as e:
        raise MeshError(f"Malformed mesh file: {e}")

    if len(vertices) != n_vertices or len(triangles) != n_triangles:
        raise MeshError("Mesh file is truncated", {"vertices": len(vertices), "triangles": len(triangles)})
    return MeshData(vertices=vertices, triangles=triangles, boundary_flags=flags)


def write_mesh(path: Union[str, Path], forest: MeshForest) -> Path:
    """Write the active partition of a forest."""
    path = Path(path)
    path.write_text(format_mesh(partition_mesh(forest)))
    logger.info("Mesh written", path=str(path), elements=forest.n_active)
    return path


def read_mesh(path: Union[str, Path]) -> MeshData:
    return parse_mesh(Path(path).read_text())
