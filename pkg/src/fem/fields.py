"""
Piecewise polynomial fields (degree <= 1) over a partition.

A field stores its values at the three vertices of each element, in the
element's vertex order. Degree 0 fields repeat the element value three
times, so every field is affine per element and evaluates by barycentric
interpolation.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.core.errors import AssemblyError
from src.mesh.forest import MeshForest

# Independent entries of a symmetric 2x2 matrix
ENTRIES = ((0, 0), (0, 1), (1, 1))


def barycentric(corners: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    Barycentric coordinates of points w.r.t. triangles.

    Args:
        corners: (n, 3, 2)
        points: (n, k, 2)

    Returns:
        (n, k, 3)
    """
    p0 = corners[:, 0]
    jac = np.stack([corners[:, 1] - p0, corners[:, 2] - p0], axis=2)   # (n, 2, 2)
    lam = np.einsum("nij,nkj->nki", np.linalg.inv(jac), points - p0[:, None, :])
    return np.concatenate([1.0 - lam.sum(axis=2, keepdims=True), lam], axis=2)


def barycentric_gradients(corners: np.ndarray) -> np.ndarray:
    """Constant gradients of the three barycentric functions, shape (m, 3, 2)."""
    x, y = corners[..., 0], corners[..., 1]
    twice_area = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    grads = np.empty(corners.shape)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        grads[:, i, 0] = y[:, j] - y[:, k]
        grads[:, i, 1] = x[:, k] - x[:, j]
    return grads / twice_area[:, None, None]


def _restricted_values(
    forest: MeshForest,
    source: np.ndarray,
    values: np.ndarray,
    target: np.ndarray
) -> np.ndarray:
    """Evaluate per-element affine data of `source` at the vertices of `target` elements."""
    positions = forest.ancestor_positions(source, target)
    ancestor_corners = forest.element_coords(source[positions])
    lam = barycentric(ancestor_corners, forest.element_coords(target))     # (n, 3, 3)
    return np.einsum("nkj,nj...->nk...", lam, values[positions])


@dataclass
class PwPolyScalar:
    """Piecewise affine (or constant) scalar field."""
    partition: np.ndarray
    values: np.ndarray          # (m, 3) vertex values
    degree: int = 1

    @classmethod
    def constant(cls, partition: np.ndarray, value: float) -> "PwPolyScalar":
        return cls(partition=np.asarray(partition), values=np.full((len(partition), 3), float(value)), degree=0)

    @classmethod
    def from_means(cls, partition: np.ndarray, means: np.ndarray) -> "PwPolyScalar":
        return cls(partition=np.asarray(partition), values=np.repeat(np.asarray(means, dtype=float)[:, None], 3, axis=1), degree=0)

    @property
    def means(self) -> np.ndarray:
        return self.values.mean(axis=1)

    def at_barycentric(self, bary: np.ndarray) -> np.ndarray:
        """Values at barycentric points (k, 3) of every element -> (m, k)."""
        return self.values @ bary.T

    def restrict(self, forest: MeshForest, partition: np.ndarray) -> "PwPolyScalar":
        """The same function represented on a refinement."""
        partition = np.asarray(partition)
        if np.array_equal(partition, self.partition):
            return self
        values = _restricted_values(forest, self.partition, self.values, partition)
        return PwPolyScalar(partition=partition, values=values, degree=self.degree)


@dataclass
class PwPolyMatrix:
    """
    Piecewise affine symmetric 2x2 matrix field with spectral bounds.

    values[e, v] holds (a11, a12, a22) at vertex v of element e.
    """
    partition: np.ndarray
    values: np.ndarray          # (m, 3, 3)
    degree: int = 1
    r_hat: Optional[float] = None
    M_hat: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_matrices(
        cls,
        partition: np.ndarray,
        matrices: np.ndarray,
        degree: int,
        r_hat: Optional[float] = None,
        M_hat: Optional[float] = None
    ) -> "PwPolyMatrix":
        """Build from vertex matrices (m, 3, 2, 2) or element matrices (m, 2, 2)."""
        matrices = np.asarray(matrices, dtype=float)
        if matrices.ndim == 3:
            matrices = np.repeat(matrices[:, None], 3, axis=1)
        values = np.stack([matrices[..., i, j] for i, j in ENTRIES], axis=-1)
        return cls(partition=np.asarray(partition), values=values, degree=degree, r_hat=r_hat, M_hat=M_hat)

    @classmethod
    def identity(cls, partition: np.ndarray, scale: float = 1.0) -> "PwPolyMatrix":
        eye = np.broadcast_to(scale * np.eye(2), (len(partition), 2, 2))
        return cls.from_matrices(partition, eye, degree=0, r_hat=scale, M_hat=scale)

    @property
    def certified(self) -> bool:
        return self.r_hat is not None and self.M_hat is not None and self.r_hat > 0

    def vertex_matrices(self) -> np.ndarray:
        """Full matrices at the element vertices, shape (m, 3, 2, 2)."""
        a11, a12, a22 = self.values[..., 0], self.values[..., 1], self.values[..., 2]
        return np.stack([np.stack([a11, a12], axis=-1), np.stack([a12, a22], axis=-1)], axis=-2)

    def at_barycentric(self, bary: np.ndarray) -> np.ndarray:
        """Matrices at barycentric points (k, 3) of every element -> (m, k, 2, 2)."""
        return np.einsum("kv,mvij->mkij", bary, self.vertex_matrices())

    def require_certified(self):
        if not self.certified:
            raise AssemblyError(
                "Coefficient approximation carries no positive spectral bounds",
                {"r_hat": self.r_hat, "M_hat": self.M_hat}
            )

    def restrict(self, forest: MeshForest, partition: np.ndarray) -> "PwPolyMatrix":
        """The same field on a refinement; restriction keeps the bounds valid."""
        partition = np.asarray(partition)
        if np.array_equal(partition, self.partition):
            return self
        values = _restricted_values(forest, self.partition, self.values, partition)
        return PwPolyMatrix(
            partition=partition,
            values=values,
            degree=self.degree,
            r_hat=self.r_hat,
            M_hat=self.M_hat,
            metadata=dict(self.metadata),
        )


def symmetric_eigenvalues(entries: np.ndarray) -> np.ndarray:
    """Closed-form eigenvalues of symmetric 2x2 matrices given as (..., 3) entries."""
    a11, a12, a22 = entries[..., 0], entries[..., 1], entries[..., 2]
    half_trace = 0.5 * (a11 + a22)
    radius = np.sqrt((0.5 * (a11 - a22)) ** 2 + a12 ** 2)
    return np.stack([half_trace - radius, half_trace + radius], axis=-1)
