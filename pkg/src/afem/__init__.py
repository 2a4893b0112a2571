"""Inner AFEM loop."""
from .config import PdeConfig
from .marking import dorfler_mark
from .pde import PdeResult, galerkin_solve, pde

__all__ = ["PdeConfig", "dorfler_mark", "PdeResult", "galerkin_solve", "pde"]
