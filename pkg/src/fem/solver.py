"""
Jacobi-preconditioned conjugate gradients.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog
from scipy import sparse

from config.settings import settings
from src.core.errors import ConvergenceError, SolverError
from src.fem.assembly import LinearSystem

logger = structlog.get_logger()


@dataclass
class CgResult:
    x: np.ndarray
    iterations: int
    residual: float         # final relative residual ||b - Kx|| / ||b||


def conjugate_gradient(
    matrix: sparse.spmatrix,
    rhs: np.ndarray,
    rel_tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    x0: Optional[np.ndarray] = None
) -> CgResult:
    """
    Solve an SPD system by diagonally preconditioned CG.

    Args:
        matrix: Symmetric positive definite sparse matrix
        rhs: Right-hand side
        rel_tol: Stop when ||b - Kx|| <= rel_tol ||b|| (default: DISC_CG_REL_TOL)
        max_iterations: Iteration cap (default: DISC_CG_MAX_ITERATIONS)
        x0: Start vector (default zero)

    Raises:
        ConvergenceError: cap reached before the tolerance
        SolverError: non-positive diagonal or curvature
    """
    rel_tol = settings.cg_rel_tol if rel_tol is None else rel_tol
    max_iterations = settings.cg_max_iterations if max_iterations is None else max_iterations

    n = len(rhs)
    b_norm = float(np.linalg.norm(rhs))
    if n == 0 or b_norm == 0.0:
        return CgResult(x=np.zeros(n), iterations=0, residual=0.0)

    diagonal = matrix.diagonal()
    if np.any(diagonal <= 0):
        raise SolverError("Matrix has non-positive diagonal entries")
    inv_diag = 1.0 / diagonal

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = rhs - matrix @ x
    threshold = rel_tol * b_norm
    res_norm = float(np.linalg.norm(r))
    if res_norm <= threshold:
        return CgResult(x=x, iterations=0, residual=res_norm / b_norm)

    z = inv_diag * r
    d = z.copy()
    rz = float(r @ z)

    for k in range(1, max_iterations + 1):
        Kd = matrix @ d
        curvature = float(d @ Kd)
        if curvature <= 0:
            raise SolverError("Matrix is not positive definite", {"iteration": k})
        alpha = rz / curvature
        x += alpha * d
        r -= alpha * Kd
        res_norm = float(np.linalg.norm(r))
        if res_norm <= threshold:
            return CgResult(x=x, iterations=k, residual=res_norm / b_norm)
        z = inv_diag * r
        rz_next = float(r @ z)
        d = z + (rz_next / rz) * d
        rz = rz_next

    raise ConvergenceError(
        f"CG did not converge in {max_iterations} iterations",
        residual=res_norm / b_norm,
        iterations=max_iterations,
    )


def solve_cg(
    system: LinearSystem,
    rel_tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    x0: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Solve a (possibly reduced) system and return the full dof vector.

    Args:
        system: System from `assemble` or `apply_dirichlet`
        rel_tol: Relative residual tolerance
        max_iterations: Iteration cap
        x0: Full dof vector used as start (e.g. a prolongated solution)
    """
    start = None if x0 is None else system.restrict(x0)
    result = conjugate_gradient(system.matrix, system.rhs, rel_tol, max_iterations, start)
    logger.debug("CG solved", dofs=system.n_dofs, iterations=result.iterations, residual=result.residual)
    return system.expand(result.x)
