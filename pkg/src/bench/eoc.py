"""
Experimental orders of convergence: least-squares slopes of log(error)
against log(dofs).
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.errors import DiscError

ASYMPTOTIC_WINDOW = 6


@dataclass
class EocReport:
    dofs: np.ndarray
    errors: np.ndarray
    asymptotic: float                   # slope over the last ASYMPTOTIC_WINDOW points
    preasymptotic: Optional[float]      # slope over the remaining points, if >= 2

    def format(self) -> str:
        pre = "nan" if self.preasymptotic is None else f"{self.preasymptotic:.6f}"
        return f"asymptotic_eoc {self.asymptotic:.6f}\npreasymptotic_eoc {pre}\npoints {len(self.dofs)}\n"


def _validate(dofs: Sequence[float], errors: Sequence[float], minimum: int) -> tuple[np.ndarray, np.ndarray]:
    dofs = np.asarray(dofs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if dofs.shape != errors.shape or dofs.ndim != 1:
        raise DiscError("dofs and errors must be 1-d arrays of equal length", {"dofs": dofs.shape, "errors": errors.shape})
    if len(dofs) < minimum:
        raise DiscError(f"EOC needs at least {minimum} points, got {len(dofs)}", {"points": len(dofs)})
    if np.any(dofs <= 0) or np.any(errors <= 0):
        raise DiscError("EOC needs positive dofs and errors")
    return dofs, errors


def loglog_slope(dofs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(dofs), >= 2 points."""
    dofs, errors = _validate(dofs, errors, 2)
    x, y = np.log(dofs), np.log(errors)
    if np.ptp(x) == 0:
        raise DiscError("EOC needs at least two distinct dof counts")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def eoc(dofs: Sequence[float], errors: Sequence[float], window: int = ASYMPTOTIC_WINDOW) -> EocReport:
    """
    Asymptotic slope over the last `window` points (all points when fewer)
    and preasymptotic slope over the rest.

    Raises:
        DiscError: fewer than 3 points
    """
    dofs, errors = _validate(dofs, errors, 3)
    tail = slice(max(len(dofs) - window, 0), None)
    asymptotic = loglog_slope(dofs[tail], errors[tail])
    head = len(dofs) - window
    preasymptotic = loglog_slope(dofs[:head], errors[:head]) if head >= 2 else None
    return EocReport(dofs=dofs, errors=errors, asymptotic=asymptotic, preasymptotic=preasymptotic)


def window_slopes(dofs: Sequence[float], errors: Sequence[float], window: int = ASYMPTOTIC_WINDOW) -> np.ndarray:
    """Slopes over every run of `window` consecutive points."""
    dofs, errors = _validate(dofs, errors, 2)
    window = min(window, len(dofs))
    return np.array([
        loglog_slope(dofs[i:i + window], errors[i:i + window])
        for i in range(len(dofs) - window + 1)
    ])
