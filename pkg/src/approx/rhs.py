"""
RHS: piecewise constant approximation of f driven by the oscillation.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from src.approx.greedy import greedy
from src.approx.local import oscillation_errors
from src.approx.oracle import CoefficientOracle
from src.fem.fields import PwPolyScalar
from src.mesh.forest import MeshForest

logger = structlog.get_logger()


@dataclass
class RhsResult:
    partition: np.ndarray
    f_hat: PwPolyScalar
    marked: int
    oscillation: float


def rhs(
    forest: MeshForest,
    oracle: CoefficientOracle,
    eps: float,
    max_elements: Optional[int] = None
) -> RhsResult:
    """
    Refine until osc(f) = (sum_T diam(T)^2 ||f - mean_T f||^2_{L2(T)})^{1/2} <= eps.

    Returns:
        RhsResult with f_hat = elementwise means
    """
    result = greedy(
        forest,
        lambda corners: oscillation_errors(oracle.eval_f, corners),
        eps,
        2.0,
        max_elements=max_elements,
        name="RHS",
    )
    f_hat = PwPolyScalar(partition=result.partition, values=result.values[:, :, 0], degree=0)
    logger.info("RHS done", elements=len(result.partition), marked=result.marked, oscillation=result.error)
    return RhsResult(partition=result.partition, f_hat=f_hat, marked=result.marked, oscillation=result.error)
