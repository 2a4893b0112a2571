"""
The outer DISC loop:

    [T_k(f), f_k] = RHS(T_k, f, omega eps_k)
    [T_k(A), A_k] = COEFF(T_k(f), A, omega eps_k)
    [T_{k+1}, U]  = PDE(T_k(A), A_k, f_k, eps_k / 2)
    eps_{k+1}     = beta eps_k

All three calls refine the same forest, so the partitions are nested.
"""
import time
from typing import Callable, Optional

import numpy as np
import structlog

from src.afem.pde import pde
from src.approx.coeff import coeff
from src.approx.oracle import CoefficientOracle
from src.approx.rhs import rhs
from src.core.errors import DiscError, DiscIterationError, PdeError
from src.disc.config import DiscConfig, ExactSolution
from src.disc.trace import DiscTrace, TraceRow
from src.fem.norms import h1_seminorm_error
from src.mesh.forest import MeshForest

logger = structlog.get_logger()

# GREEDY element cap when none is configured
GREEDY_ELEMENTS_PER_DOF = 4


def count_dofs(forest: MeshForest) -> int:
    """Vertices of the active partition (one P1 dof each)."""
    return int(np.unique(forest.element_vertices()).size)


def disc(
    forest: MeshForest,
    oracle: CoefficientOracle,
    config: Optional[DiscConfig] = None,
    exact: Optional[ExactSolution] = None,
    boundary: Optional[Callable[[np.ndarray], np.ndarray]] = None
) -> DiscTrace:
    """
    Run DISC from the forest's current partition.

    Args:
        forest: Mesh forest (T0 or any refinement), refined in place
        oracle: Exact data A, f with bounds r, M
        config: Loop parameters
        exact: Exact solution, enables the energy error column
        boundary: Dirichlet data (zero when None)

    Returns:
        DiscTrace with one row per completed outer iteration

    Raises:
        DiscIterationError: a subroutine failed; the partial trace is attached
    """
    config = config or DiscConfig()
    greedy_cap = config.greedy_max_elements or GREEDY_ELEMENTS_PER_DOF * config.max_dofs
    trace = DiscTrace()
    eps_k = config.eps0
    forest.conforming_closure()
    log = logger.bind(routine="DISC", q=config.q, degree_A=config.degree_A)

    for k in range(config.max_outer_iterations):
        started = time.perf_counter()
        try:
            rhs_result = rhs(forest, oracle, config.omega * eps_k, greedy_cap)
            dofs_rhs = count_dofs(forest)
            coeff_result = coeff(
                forest, oracle, config.omega * eps_k, config.q, config.degree_A,
                max_elements=greedy_cap,
            )
            dofs_coeff = count_dofs(forest)
            pde_result = pde(forest, coeff_result.A_hat, rhs_result.f_hat, eps_k / 2, config.pde, boundary)
            if pde_result.failure == "max_inner_iterations":
                raise PdeError(
                    "PDE exceeded its inner iteration cap",
                    {"eta": pde_result.eta, "iterations": pde_result.iterations}
                )
        except DiscError as e:
            trace.stop_reason = "error"
            log.error("DISC iteration failed", k=k, error=e.message)
            raise DiscIterationError(f"DISC iteration {k} failed: {e.message}", iteration=k, cause=e, trace=trace) from e

        energy_error = None
        if exact is not None:
            energy_error = h1_seminorm_error(
                pde_result.space, pde_result.U, exact.gradient, exact.singular_points, exact.interface
            )
        elapsed = time.perf_counter() - started

        row = TraceRow(
            k=k,
            eps_k=eps_k,
            dofs_rhs=dofs_rhs,
            dofs_coeff=dofs_coeff,
            dofs_pde=pde_result.space.n_dofs,
            Nf=rhs_result.marked,
            NA=coeff_result.marked,
            Nu=pde_result.marked_total,
            eta=pde_result.eta,
            energy_error=energy_error,
            seconds=elapsed if config.record_timing else 0.0,
            elements=forest.n_active,
            oscillation=rhs_result.oscillation,
            coeff_error=coeff_result.error,
            r_hat=coeff_result.A_hat.r_hat,
            M_hat=coeff_result.A_hat.M_hat,
            inner_iterations=pde_result.iterations,
            eta_entry=pde_result.eta_entry,
            contraction=pde_result.contraction,
            closure_overhead=forest.closure_overhead(),
            galerkin_residual=max(pde_result.residual_history, default=0.0),
        )
        trace.rows.append(row)
        trace.final = {
            "space": pde_result.space,
            "U": pde_result.U,
            "report": pde_result.report,
            "A_hat": coeff_result.A_hat,
            "f_hat": rhs_result.f_hat,
        }
        log.info(
            "DISC iteration",
            k=k,
            eps=eps_k,
            dofs=row.dofs_pde,
            Nf=row.Nf,
            NA=row.NA,
            Nu=row.Nu,
            eta=row.eta,
            energy_error=energy_error,
            inner_iterations=row.inner_iterations,
            seconds=round(elapsed, 3),
        )

        if pde_result.failed or row.dofs_pde >= config.max_dofs:
            trace.stop_reason = "max_dofs"
            break
        eps_k *= config.beta
    else:
        trace.stop_reason = "max_outer_iterations"

    log.info("DISC finished", iterations=len(trace), reason=trace.stop_reason)
    return trace
