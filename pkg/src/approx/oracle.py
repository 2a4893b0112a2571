"""
Exact data of an elliptic problem: coefficient A, right-hand side f and
certified spectral bounds.
"""
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# (n, 2) -> (n, 2, 2)
MatrixField = Callable[[np.ndarray], np.ndarray]
# (n, 2) -> (n,)
ScalarField = Callable[[np.ndarray], np.ndarray]


class CoefficientOracle(BaseModel):
    """Pointwise evaluators for A and f with r <= lambda(A) <= M."""
    eval_A: MatrixField
    eval_f: ScalarField
    r: float = Field(gt=0.0)
    M: float = Field(gt=0.0)
    singular_points: list[tuple[float, float]] = Field(default_factory=list)
    interface: Optional[ScalarField] = None     # level set of the coefficient jumps

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def check_bounds(self) -> "CoefficientOracle":
        if self.r > self.M:
            raise ValueError(f"Spectral bounds require r <= M, got r={self.r}, M={self.M}")
        return self

    def entries(self, points: np.ndarray) -> np.ndarray:
        """(a11, a12, a22) at the points, shape (n, 3)."""
        A = np.asarray(self.eval_A(points), dtype=float)
        return np.stack([A[:, 0, 0], 0.5 * (A[:, 0, 1] + A[:, 1, 0]), A[:, 1, 1]], axis=1)

    def eigenvalue_range(self, points: np.ndarray) -> tuple[float, float]:
        """Smallest and largest eigenvalue of A over the sample points."""
        eig = np.linalg.eigvalsh(np.asarray(self.eval_A(points), dtype=float))
        return float(eig.min()), float(eig.max())
