"""
Meyers exponent arithmetic and the Lebesgue pairing of Lp gradients with Lq
coefficient errors.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

from pydantic import BaseModel, Field

from src.core.errors import ApproximationError


class MeyersParams(BaseModel):
    """Domain integrability limit P, norm constant K and spectral bounds."""
    P: float = Field(gt=2.0)
    K: float = Field(ge=1.0)
    r: float = Field(gt=0.0)
    M: float = Field(gt=0.0)


@dataclass
class MeyersRange:
    p_star: float
    eta_star: float
    constant: Callable[[float], float]


def interpolation_weight(p: float, P: float) -> float:
    """eta(p) = (1/2 - 1/p) / (1/2 - 1/P); 0 at p = 2, 1 at p = P."""
    inverse = 0.0 if math.isinf(p) else 1.0 / p
    return (0.5 - inverse) / (0.5 - 1.0 / P)


def exponent_from_weight(eta: float, P: float) -> float:
    """Inverse of `interpolation_weight`."""
    return 1.0 / (0.5 - eta * (0.5 - 1.0 / P))


def conjugate_exponent(p: float) -> float:
    """q = 2p/(p-2) pairing ||grad u||_Lp with ||A - A_hat||_Lq; p = inf gives 2."""
    if math.isinf(p):
        return 2.0
    if p <= 2:
        raise ApproximationError(f"Pairing needs p > 2, got {p}", {"p": p})
    return 2.0 * p / (p - 2.0)


def meyers_range(params: MeyersParams, t: Optional[float] = None) -> MeyersRange:
    """
    Largest exponent p* with K^eta(p) (1 - t) < 1, and the gradient bound C(p).

    Args:
        params: Meyers parameters
        t: Contrast parameter in (0, 1) (default: r / M)

    Returns:
        MeyersRange with C(p) = (1/M) K^eta / (1 - K^eta (1 - r/M)) for p < p*
    """
    t = params.r / params.M if t is None else t
    if not 0.0 < t < 1.0:
        raise ApproximationError(f"t must lie in (0, 1), got {t}", {"t": t})

    if params.K == 1.0:
        eta_star = 1.0
    else:
        eta_star = min(1.0, math.log(1.0 / (1.0 - t)) / math.log(params.K))
    p_star = exponent_from_weight(eta_star, params.P)
    contrast = 1.0 - params.r / params.M

    def constant(p: float) -> float:
        if p < 2.0 or p > p_star:
            raise ApproximationError(f"C(p) is defined for 2 <= p < p*={p_star:g}", {"p": p})
        growth = params.K ** interpolation_weight(p, params.P)
        denominator = 1.0 - growth * contrast
        if denominator <= 0:
            raise ApproximationError(f"C(p) diverges at p={p:g}", {"p": p, "p_star": p_star})
        return growth / (params.M * denominator)

    return MeyersRange(p_star=p_star, eta_star=eta_star, constant=constant)
