"""
Galerkin assembly of the P1 system for -div(A grad u) = f.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog
from scipy import sparse

from src.core.errors import AssemblyError, MeshError
from src.fem.fields import PwPolyMatrix, PwPolyScalar
from src.fem.space import P1Space
from src.quadrature.rules import DUNAVANT_4, QuadratureRule

logger = structlog.get_logger()


@dataclass
class LinearSystem:
    """
    Sparse symmetric system K x = b.

    After Dirichlet elimination the system lives on the free dofs; `expand`
    maps its solution back to a full dof vector.
    """
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    free: Optional[np.ndarray] = None
    fixed: Optional[np.ndarray] = None
    fixed_values: Optional[np.ndarray] = None
    full_size: Optional[int] = None

    @property
    def n_dofs(self) -> int:
        return len(self.rhs)

    def expand(self, x: np.ndarray) -> np.ndarray:
        if self.free is None:
            return x
        full = np.empty(self.full_size)
        full[self.free] = x
        full[self.fixed] = self.fixed_values
        return full

    def restrict(self, full: np.ndarray) -> np.ndarray:
        return full if self.free is None else full[self.free]


def local_stiffness(space: P1Space, A: PwPolyMatrix, rule: QuadratureRule = DUNAVANT_4) -> np.ndarray:
    """Element matrices grad(phi_i)^T (int_T A) grad(phi_j), shape (m, 3, 3)."""
    A_points = A.at_barycentric(rule.points)                                 # (m, k, 2, 2)
    A_integral = np.einsum("k,mkij->mij", rule.weights, A_points) * space.areas[:, None, None]
    grads = space.gradients
    return np.einsum("mid,mde,mje->mij", grads, A_integral, grads)


def local_load(space: P1Space, f: PwPolyScalar, rule: QuadratureRule = DUNAVANT_4) -> np.ndarray:
    """Element vectors int_T f phi_i, shape (m, 3)."""
    f_points = f.at_barycentric(rule.points)                                # (m, k)
    return np.einsum("k,mk,ki->mi", rule.weights, f_points, rule.points) * space.areas[:, None]


def assemble_matrix(space: P1Space, local: np.ndarray) -> sparse.csr_matrix:
    rows = np.repeat(space.elements, 3, axis=1).ravel()
    cols = np.tile(space.elements, (1, 3)).ravel()
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)).tocsr()


def assemble(space: P1Space, A: PwPolyMatrix, f: PwPolyScalar) -> LinearSystem:
    """
    Assemble stiffness matrix and load vector.

    Args:
        space: P1 space on a conforming partition
        A: Certified coefficient approximation on the space's partition or a coarsening
        f: Right-hand side approximation on the space's partition or a coarsening

    Returns:
        Full LinearSystem (no boundary conditions applied)

    Raises:
        AssemblyError: uncertified A or partition mismatch
    """
    A.require_certified()
    try:
        A = A.restrict(space.forest, space.partition)
        f = f.restrict(space.forest, space.partition)
    except MeshError as e:
        raise AssemblyError(f"Data partition does not match the space: {e.message}")

    K = assemble_matrix(space, local_stiffness(space, A))
    b = np.zeros(space.n_dofs)
    np.add.at(b, space.elements, local_load(space, f))

    logger.debug("System assembled", dofs=space.n_dofs, nnz=K.nnz)
    return LinearSystem(matrix=K, rhs=b)


def apply_dirichlet(system: LinearSystem, space: P1Space, g: Optional[np.ndarray] = None) -> LinearSystem:
    """
    Eliminate boundary dofs symmetrically.

    Args:
        system: Full system from `assemble`
        space: The space it was assembled on
        g: Values at space.boundary_dofs (default zero)

    Returns:
        Reduced system on the interior dofs
    """
    free, fixed = space.interior_dofs, space.boundary_dofs
    g = np.zeros(len(fixed)) if g is None else np.asarray(g, dtype=float)
    K = system.matrix
    K_free = K[free][:, free].tocsr()
    rhs = system.rhs[free] - K[free][:, fixed] @ g
    return LinearSystem(
        matrix=K_free,
        rhs=rhs,
        free=free,
        fixed=fixed,
        fixed_values=g,
        full_size=space.n_dofs,
    )
