"""P1 finite elements: assembly, solver and residual estimator."""
from .assembly import LinearSystem, apply_dirichlet, assemble
from .estimator import EstimatorReport, estimate
from .fields import PwPolyMatrix, PwPolyScalar
from .norms import discrete_gradient_norm, h1_seminorm_error
from .solver import CgResult, conjugate_gradient, solve_cg
from .space import P1Space, prolongate

__all__ = [
    "LinearSystem",
    "assemble",
    "apply_dirichlet",
    "EstimatorReport",
    "estimate",
    "PwPolyMatrix",
    "PwPolyScalar",
    "h1_seminorm_error",
    "discrete_gradient_norm",
    "CgResult",
    "conjugate_gradient",
    "solve_cg",
    "P1Space",
    "prolongate",
]
