"""
Exception hierarchy for the DISC adaptive FEM solver.
"""
from typing import Any, Optional


class DiscError(Exception):
    """Base error."""
    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)


# ===========================================
# Mesh
# ===========================================

class MeshError(DiscError):
    """Invalid mesh input or forest operation."""
    pass


class IncompatibleLabelingError(MeshError):
    """Initial labeling violates the refinement-edge pairing condition."""
    pass


class NonConformingError(MeshError):
    """Operation requires a conforming partition."""
    pass


class InactiveElementError(MeshError):
    """Element is not a leaf of the current partition."""
    pass


class DegenerateElementError(MeshError):
    """Zero-area or negatively oriented triangle."""
    pass


# ===========================================
# Numerics
# ===========================================

class QuadratureError(DiscError):
    """Invalid quadrature request."""
    pass


class AssemblyError(DiscError):
    """Assembly inputs are inconsistent."""
    pass


class SolverError(DiscError):
    """Linear solver failure."""
    pass


class ConvergenceError(SolverError):
    """Iterative solver hit its iteration cap."""
    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message, {"residual": residual, "iterations": iterations})


class ApproximationError(DiscError):
    """Invalid data approximation request."""
    pass


class GreedyNonConvergenceError(ApproximationError):
    """GREEDY exceeded its element cap before reaching the tolerance."""
    def __init__(self, message: str, error: float, elements: int, floor: float, tolerance: float):
        self.error = error
        self.elements = elements
        self.floor = floor
        self.tolerance = tolerance
        super().__init__(message, {
            "error": error,
            "elements": elements,
            "floor": floor,
            "tolerance": tolerance,
        })


class PdeError(DiscError):
    """Inner AFEM loop failure."""
    pass


class DiscIterationError(DiscError):
    """Subroutine failure inside the outer DISC loop."""
    def __init__(self, message: str, iteration: int, cause: DiscError, trace: Any = None):
        self.iteration = iteration
        self.cause = cause
        self.trace = trace
        super().__init__(message, {"iteration": iteration, **cause.details})


class UnknownCaseError(DiscError):
    """Unknown benchmark name."""
    pass
