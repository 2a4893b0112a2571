"""
COEFF: Lq approximation of the diffusion matrix with positivity repair.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from config.settings import settings
from src.approx.greedy import greedy
from src.approx.local import check_degree, check_exponent, local_errors
from src.approx.oracle import CoefficientOracle
from src.core.errors import ApproximationError
from src.fem.fields import PwPolyMatrix, symmetric_eigenvalues
from src.mesh.forest import MeshForest

logger = structlog.get_logger()

KEEP, IDENTITY, SHIFT = 0, 1, 2


@dataclass
class CoeffResult:
    partition: np.ndarray
    A_hat: PwPolyMatrix
    marked: int
    error: float
    repairs: dict[str, int]


def repair_field(values: np.ndarray, r: float, M: float, C: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Make an elementwise affine symmetric matrix field uniformly positive definite.

    Per element, with mu = min vertex lambda_min and M0 = max vertex lambda_max:
      - M0 > C*M               -> r*I
      - mu >= r/2              -> unchanged
      - otherwise              -> B + (3r/4 - mu) I
    A shift that would push lambda_max above C*M + 3r/4 falls back to r*I.

    Args:
        values: (m, 3, 3) vertex entries (a11, a12, a22)
        r: Lower spectral bound of the exact coefficient
        M: Upper spectral bound of the exact coefficient
        C: Repair constant, >= 4 (default: DISC_REPAIR_CONSTANT)

    Returns:
        (repaired values, branch code per element)
    """
    C = settings.repair_constant if C is None else C
    if C < 4:
        raise ApproximationError(f"Repair constant must be at least 4, got {C}", {"C": C})
    values = np.array(values, dtype=float)
    eig = symmetric_eigenvalues(values)                  # (m, 3, 2)
    mu = eig[..., 0].min(axis=1)
    M0 = eig[..., 1].max(axis=1)
    shift = 0.75 * r - mu

    branch = np.full(len(values), SHIFT)
    branch[mu >= 0.5 * r] = KEEP
    branch[(M0 > C * M) | ((branch == SHIFT) & (M0 + shift > C * M + 0.75 * r))] = IDENTITY

    shifted = branch == SHIFT
    values[shifted, :, 0] += shift[shifted, None]
    values[shifted, :, 2] += shift[shifted, None]
    values[branch == IDENTITY] = np.array([r, 0.0, r])
    return values, branch


def repair_positivity(B: np.ndarray, r: float, M: float, C: Optional[float] = None) -> np.ndarray:
    """
    Repair a single affine matrix on one element.

    Args:
        B: Vertex entries (3, 3), or a constant 2x2 matrix
    """
    B = np.asarray(B, dtype=float)
    constant = B.shape == (2, 2)
    if constant:
        B = np.repeat(np.array([[B[0, 0], 0.5 * (B[0, 1] + B[1, 0]), B[1, 1]]]), 3, axis=0)
    if B.shape != (3, 3):
        raise ApproximationError("Expected vertex entries of shape (3, 3) or a 2x2 matrix", {"shape": B.shape})
    repaired, _ = repair_field(B[None], r, M, C)
    if constant:
        a11, a12, a22 = repaired[0, 0]
        return np.array([[a11, a12], [a12, a22]])
    return repaired[0]


def coeff(
    forest: MeshForest,
    oracle: CoefficientOracle,
    eps: float,
    q: float,
    degree: int,
    max_elements: Optional[int] = None,
    repair_constant: Optional[float] = None
) -> CoeffResult:
    """
    Approximate A to Lq accuracy eps on a refinement of the current partition.

    Args:
        forest: Mesh forest, refined in place
        oracle: Exact coefficient with bounds (r, M)
        eps: Tolerance
        q: Exponent in [2, inf]
        degree: Approximant degree, 0 or 1
        max_elements: GREEDY element cap
        repair_constant: C in the repair recipe

    Returns:
        CoeffResult whose A_hat carries certified bounds
    """
    check_exponent(q)
    check_degree(degree)
    r, M = oracle.r, oracle.M

    result = greedy(
        forest,
        lambda corners: local_errors(oracle.entries, corners, q, degree),
        eps,
        q,
        max_elements=max_elements,
        name="COEFF",
    )
    values = result.values                                              # (m, 3, 3)

    if degree == 0 and not np.isinf(q):
        # Meanvalues are convex combinations of A: bounds carry over
        A_hat = PwPolyMatrix(partition=result.partition, values=values, degree=0, r_hat=r, M_hat=M)
        repairs = {"keep": len(values), "identity": 0, "shift": 0}
    else:
        values, branch = repair_field(values, r, M, repair_constant)
        eig = symmetric_eigenvalues(values)
        A_hat = PwPolyMatrix(
            partition=result.partition,
            values=values,
            degree=degree,
            r_hat=float(eig[..., 0].min()),
            M_hat=float(eig[..., 1].max()),
        )
        repairs = {
            "keep": int(np.sum(branch == KEEP)),
            "identity": int(np.sum(branch == IDENTITY)),
            "shift": int(np.sum(branch == SHIFT)),
        }

    A_hat.metadata.update({"q": q, "eps": eps, "error": result.error})
    logger.info(
        "COEFF done",
        elements=len(result.partition),
        marked=result.marked,
        error=result.error,
        r_hat=A_hat.r_hat,
        M_hat=A_hat.M_hat,
        **repairs
    )
    return CoeffResult(partition=result.partition, A_hat=A_hat, marked=result.marked, error=result.error, repairs=repairs)
