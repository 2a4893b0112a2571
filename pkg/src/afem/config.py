"""
Inner AFEM loop configuration.
"""
from pydantic import BaseModel, Field

from config.settings import settings


class PdeConfig(BaseModel):
    """Parameters of PDE(T, A_hat, f_hat, eps)."""
    theta: float = Field(default=0.3, gt=0.0, lt=1.0)
    cg_rel_tol: float = Field(default_factory=lambda: settings.cg_rel_tol, gt=0.0)
    max_inner_iterations: int = Field(default=200, ge=0)
    max_dofs: int = Field(default=200_000, ge=1)
