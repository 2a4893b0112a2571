"""
PDE(T, A_hat, f_hat, eps): SOLVE -> ESTIMATE -> MARK -> REFINE + closure until
the residual estimator is at most eps.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import structlog

from src.afem.config import PdeConfig
from src.afem.marking import dorfler_mark
from src.fem.assembly import apply_dirichlet, assemble
from src.fem.estimator import EstimatorReport, estimate
from src.fem.fields import PwPolyMatrix, PwPolyScalar
from src.fem.solver import solve_cg
from src.fem.space import P1Space, prolongate
from src.mesh.forest import MeshForest

logger = structlog.get_logger()

BoundaryData = Optional[Callable[[np.ndarray], np.ndarray]]


@dataclass
class PdeResult:
    """Outcome of one inner AFEM loop."""
    partition: np.ndarray
    space: P1Space
    U: np.ndarray
    report: EstimatorReport
    iterations: int                     # refinement passes performed
    marked_total: int                   # Doerfler-marked elements, closure excluded
    failed: bool = False
    failure: Optional[str] = None       # "max_dofs" | "max_inner_iterations"
    eta_history: list[float] = field(default_factory=list)
    galerkin_residual: float = 0.0      # relative algebraic residual on the free dofs
    residual_history: list[float] = field(default_factory=list)

    @property
    def eta(self) -> float:
        return self.report.total

    @property
    def eta_entry(self) -> float:
        """Estimator on the entry partition."""
        return self.eta_history[0] if self.eta_history else self.eta

    @property
    def contraction(self) -> Optional[float]:
        """Mean ratio eta_{i+1} / eta_i over the loop."""
        etas = np.asarray(self.eta_history)
        positive = etas[:-1] > 0
        if len(etas) < 2 or not positive.any():
            return None
        return float(np.mean(etas[1:][positive] / etas[:-1][positive]))


def galerkin_solve(
    space: P1Space,
    A_hat: PwPolyMatrix,
    f_hat: PwPolyScalar,
    boundary: BoundaryData = None,
    rel_tol: Optional[float] = None,
    x0: Optional[np.ndarray] = None
) -> tuple[np.ndarray, float]:
    """
    Discrete solution with Dirichlet data interpolated at boundary vertices.

    Returns:
        (full dof vector, relative residual of the reduced system)
    """
    system = apply_dirichlet(assemble(space, A_hat, f_hat), space, space.boundary_values(boundary))
    U = solve_cg(system, rel_tol=rel_tol, x0=x0)
    b_norm = float(np.linalg.norm(system.rhs))
    residual = float(np.linalg.norm(system.matrix @ system.restrict(U) - system.rhs))
    return U, (residual / b_norm if b_norm > 0 else residual)


def pde(
    forest: MeshForest,
    A_hat: PwPolyMatrix,
    f_hat: PwPolyScalar,
    eps: float,
    config: Optional[PdeConfig] = None,
    boundary: BoundaryData = None
) -> PdeResult:
    """
    Inner AFEM loop on the forest's current (conforming) partition.

    Args:
        forest: Mesh forest, refined in place
        A_hat: Certified coefficient approximation on a coarsening of the partition
        f_hat: Right-hand side approximation on a coarsening of the partition
        eps: Estimator target
        config: Loop parameters
        boundary: Dirichlet data (zero when None)

    Returns:
        PdeResult; `failed` is set when a cap stopped the loop above eps
    """
    config = config or PdeConfig()
    log = logger.bind(routine="PDE", eps=eps)

    space = P1Space(forest)
    previous: Optional[tuple[P1Space, np.ndarray]] = None
    marked_total = 0
    history: list[float] = []
    residuals: list[float] = []
    iteration = 0

    while True:
        x0 = prolongate(previous[0], previous[1], space) if previous else None
        U, residual = galerkin_solve(space, A_hat, f_hat, boundary, config.cg_rel_tol, x0)
        report = estimate(space, U, A_hat, f_hat)
        residuals.append(residual)
        history.append(report.total)

        failure = None
        if report.total > eps:
            if space.n_dofs >= config.max_dofs:
                failure = "max_dofs"
            elif iteration >= config.max_inner_iterations:
                failure = "max_inner_iterations"

        if report.total <= eps or failure:
            if failure:
                log.warning("PDE stopped above tolerance", reason=failure, dofs=space.n_dofs, eta=report.total)
            return PdeResult(
                partition=space.partition,
                space=space,
                U=U,
                report=report,
                iterations=iteration,
                marked_total=marked_total,
                failed=failure is not None,
                failure=failure,
                eta_history=history,
                galerkin_residual=residual,
                residual_history=residuals,
            )

        marked = dorfler_mark(report, config.theta)
        log.info("AFEM iteration", iteration=iteration, dofs=space.n_dofs, eta=report.total, marked=len(marked))
        forest.refine_marked(marked)
        forest.conforming_closure()
        marked_total += len(marked)
        iteration += 1
        previous = (space, U)
        space = P1Space(forest)
