"""
Numerical checks of the coefficient perturbation estimate

    ||grad(u - u_hat)||_L2 <= r_hat^{-1} ||grad u||_Lp ||A - A_hat||_Lq,   q = 2p / (p - 2),

and of the scaling identity u_{A / c} = c u_A.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import structlog

from config.settings import settings
from src.afem.pde import galerkin_solve
from src.approx.local import l2_projection
from src.approx.meyers import conjugate_exponent
from src.approx.oracle import CoefficientOracle
from src.fem.fields import PwPolyMatrix, PwPolyScalar, barycentric
from src.fem.norms import discrete_gradient_norm, integrate_piecewise
from src.fem.space import P1Space
from src.mesh.forest import MeshForest

logger = structlog.get_logger()


@dataclass
class PerturbationResult:
    lhs: float
    rhs: float
    ratio: float
    p: float
    q: float
    dofs: int


@dataclass
class ScalingResult:
    deviation: float
    factor: float
    norm: float                 # ||A_hat||_Lq
    reference: float            # Euclidean norm of U1

    def within(self, rel_tol: Optional[float] = None) -> bool:
        rel_tol = settings.cg_rel_tol if rel_tol is None else rel_tol
        return self.deviation <= 10.0 * rel_tol * self.reference


def spectral_norms(entries: np.ndarray) -> np.ndarray:
    """Largest absolute eigenvalue of symmetric 2x2 matrices given as (..., 3) entries."""
    a11, a12, a22 = entries[..., 0], entries[..., 1], entries[..., 2]
    return np.abs(0.5 * (a11 + a22)) + np.sqrt((0.5 * (a11 - a22)) ** 2 + a12 ** 2)


def _field_at(field: PwPolyMatrix, corners: np.ndarray, x: np.ndarray, elements: np.ndarray) -> np.ndarray:
    lam = barycentric(corners[elements], x[:, None, :])[:, 0]              # (n, 3)
    return np.einsum("nv,nvc->nc", lam, field.values[elements])


def coefficient_distance(
    space: P1Space,
    A: Callable[[np.ndarray], np.ndarray],
    A_hat: PwPolyMatrix,
    q: float,
    singular_points=(),
    interface=None
) -> float:
    """||A - A_hat||_Lq with the pointwise spectral norm; A maps points to (n, 3) entries."""
    corners = space.corners

    def integrand(x: np.ndarray, elements: np.ndarray) -> np.ndarray:
        return spectral_norms(A(x) - _field_at(A_hat, corners, x, elements)) ** q

    total = integrate_piecewise(integrand, corners, singular_points, interface).sum()
    return float(max(total, 0.0) ** (1.0 / q))


def field_norm(space: P1Space, A_hat: PwPolyMatrix, q: float) -> float:
    """||A_hat||_Lq of a field living on the space's partition."""
    corners = space.corners

    def integrand(x: np.ndarray, elements: np.ndarray) -> np.ndarray:
        return spectral_norms(_field_at(A_hat, corners, x, elements)) ** q

    return float(max(integrate_piecewise(integrand, corners).sum(), 0.0) ** (1.0 / q))


def reference_coefficient(oracle: CoefficientOracle, space: P1Space) -> PwPolyMatrix:
    """Elementwise means of A on a fine partition, computed by adaptive quadrature."""
    values = l2_projection(
        oracle.entries,
        space.corners,
        degree=0,
        tol=settings.error_quad_tol,
        max_depth=settings.error_quad_max_depth,
    )
    return PwPolyMatrix(partition=space.partition, values=values, degree=0, r_hat=oracle.r, M_hat=oracle.M)


def perturbation_check(
    forest: MeshForest,
    oracle: CoefficientOracle,
    A_hat: PwPolyMatrix,
    fine_level: int = 2,
    p: float = np.inf,
    boundary: Optional[Callable[[np.ndarray], np.ndarray]] = None
) -> PerturbationResult:
    """
    Compare solutions for A and A_hat on a common fine partition.

    The forest is copied and refined uniformly `fine_level` times; both
    problems share the P1 projection of f, so the data term vanishes.

    Args:
        forest: Forest on which A_hat lives (left untouched)
        oracle: Exact A and f
        A_hat: Certified coefficient approximation
        fine_level: Uniform refinements of the common partition
        p: Integrability exponent of grad u, in (2, inf]
        boundary: Dirichlet data

    Raises:
        AssemblyError: A_hat carries no certified bounds
        ApproximationError: p <= 2
    """
    A_hat.require_certified()
    q = conjugate_exponent(p)

    fine = forest.copy()
    fine.refine_uniform(fine_level)
    space = P1Space(fine)

    A_ref = reference_coefficient(oracle, space)
    A_fine = A_hat.restrict(fine, space.partition)
    f_values = l2_projection(oracle.eval_f, space.corners, degree=1)[:, :, 0]
    f_fine = PwPolyScalar(partition=space.partition, values=f_values, degree=1)

    U, _ = galerkin_solve(space, A_ref, f_fine, boundary)
    U_hat, _ = galerkin_solve(space, A_fine, f_fine, boundary)

    lhs = discrete_gradient_norm(space, U - U_hat, 2.0)
    distance = coefficient_distance(space, oracle.entries, A_fine, q, oracle.singular_points, oracle.interface)
    rhs = discrete_gradient_norm(space, U, p) * distance / A_hat.r_hat
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs == 0 else np.inf

    logger.info("Perturbation check", dofs=space.n_dofs, p=p, q=q, lhs=lhs, rhs=rhs, ratio=ratio)
    return PerturbationResult(lhs=lhs, rhs=rhs, ratio=float(ratio), p=p, q=q, dofs=space.n_dofs)


def scaling_identity_check(
    space: P1Space,
    A_hat: PwPolyMatrix,
    delta: float,
    f_hat: PwPolyScalar,
    q: float = 2.0,
    rel_tol: Optional[float] = None
) -> ScalingResult:
    """
    Solve with A1 = A_hat and A2 = A_hat / (1 + delta / s), s = ||A_hat||_Lq,
    under homogeneous Dirichlet data and report max |U2 - (1 + delta / s) U1|.

    Args:
        space: P1 space on the partition of A_hat (or a refinement)
        A_hat: Certified coefficient field
        delta: Perturbation size, >= 0
        f_hat: Right-hand side field
        q: Exponent of the normalising norm
        rel_tol: CG relative tolerance
    """
    A_hat.require_certified()
    forest = space.forest
    A1 = A_hat.restrict(forest, space.partition)
    f1 = f_hat.restrict(forest, space.partition)
    s = field_norm(space, A1, q)
    factor = 1.0 + delta / s

    A2 = PwPolyMatrix(
        partition=A1.partition,
        values=A1.values / factor,
        degree=A1.degree,
        r_hat=A1.r_hat / factor,
        M_hat=A1.M_hat / factor,
    )
    U1, _ = galerkin_solve(space, A1, f1, rel_tol=rel_tol)
    U2, _ = galerkin_solve(space, A2, f1, rel_tol=rel_tol)

    deviation = float(np.max(np.abs(U2 - factor * U1))) if U1.size else 0.0
    logger.info("Scaling identity check", delta=delta, factor=factor, deviation=deviation)
    return ScalingResult(deviation=deviation, factor=factor, norm=s, reference=float(np.linalg.norm(U1)))
