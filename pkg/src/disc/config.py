"""
Outer DISC loop configuration and exact-solution description.
"""
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import settings
from src.afem.config import PdeConfig


class DiscConfig(BaseModel):
    """Parameters of DISC; defaults are the L-shaped benchmark set."""
    eps0: float = Field(default=2.0, gt=0.0)
    omega: float = Field(default=0.8, gt=0.0, lt=1.0)
    beta: float = Field(default=0.7, gt=0.0, lt=1.0)
    q: float = Field(default=2.0, ge=2.0)
    degree_u: Literal[1] = 1
    degree_f: Literal[0] = 0
    degree_A: Literal[0, 1] = 0
    pde: PdeConfig = Field(default_factory=PdeConfig)
    max_outer_iterations: int = Field(default=40, ge=1)
    max_dofs: int = Field(default=200_000, ge=1)
    greedy_max_elements: Optional[int] = Field(default=None, ge=1)
    record_timing: bool = Field(default_factory=lambda: settings.record_timing)


class ExactSolution(BaseModel):
    """Exact u and grad u with hints for the error quadrature."""
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    singular_points: list[tuple[float, float]] = Field(default_factory=list)
    interface: Optional[Callable[[np.ndarray], np.ndarray]] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)
