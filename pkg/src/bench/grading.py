"""
Mesh grading diagnostic: element diameters per dyadic annulus around a point.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.errors import MeshError
from src.mesh.forest import MeshForest, triangle_diameters


@dataclass
class AnnulusStats:
    level: int              # annulus 2^-(level+1) < |x - c| < 2^-level
    count: int
    max_diameter: Optional[float]
    min_diameter: Optional[float]

    @property
    def empty(self) -> bool:
        return self.count == 0


def annulus_grading(
    forest: MeshForest,
    center: Sequence[float],
    levels: int,
    partition: Optional[Sequence[int]] = None
) -> list[AnnulusStats]:
    """
    Diameter statistics of the elements whose barycentres fall into each annulus.

    Args:
        forest: Mesh forest
        center: Annulus centre
        levels: Number of annuli, >= 1
        partition: Element ids (default: the active partition)
    """
    if levels < 1:
        raise MeshError(f"levels must be at least 1, got {levels}", {"levels": levels})
    ids = forest.active_elements() if partition is None else np.asarray(partition)
    corners = forest.element_coords(ids)
    distance = np.linalg.norm(corners.mean(axis=1) - np.asarray(center, dtype=float), axis=1)
    diameters = triangle_diameters(corners)

    stats = []
    for level in range(levels):
        inside = (distance > 2.0 ** -(level + 1)) & (distance < 2.0 ** -level)
        d = diameters[inside]
        stats.append(AnnulusStats(
            level=level,
            count=int(inside.sum()),
            max_diameter=float(d.max()) if d.size else None,
            min_diameter=float(d.min()) if d.size else None,
        ))
    return stats
