"""
Benchmark problems with known solutions.

    lshaped  : L-shaped domain, radial coefficient jump at rho = rho0
    kellogg  : checkerboard coefficient, singularity on the jump lines
    smooth   : unit square, Laplacian, sin(pi x) sin(pi y)
"""
import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.approx.oracle import CoefficientOracle
from src.disc.config import DiscConfig, ExactSolution
from src.mesh.forest import MeshForest
from src.mesh.initial import MeshData, centered_square, lshape, unit_square


class TestCase(BaseModel):
    """A benchmark: initial mesh, exact data and exact solution."""
    __test__ = False

    name: str
    description: str
    mesh: MeshData
    oracle: CoefficientOracle
    exact: ExactSolution
    defaults: dict = Field(default_factory=dict)      # recommended DiscConfig overrides

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def boundary(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.exact.value

    def initial_forest(self) -> MeshForest:
        return self.mesh.to_forest()

    def config(self, **overrides) -> DiscConfig:
        return DiscConfig(**{**self.defaults, **overrides})


def _scalar_identity(a: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Matrix field a(x) I from a scalar field."""
    def A(points: np.ndarray) -> np.ndarray:
        values = np.asarray(a(points), dtype=float)
        return values[:, None, None] * np.eye(2)
    return A


def _polar_to_cartesian(theta: np.ndarray, radial: np.ndarray, angular: np.ndarray) -> np.ndarray:
    """grad u from its components along e_rho and e_theta."""
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([radial * c - angular * s, radial * s + angular * c], axis=1)


# =============================================================================
# TEST 1: L-SHAPED DOMAIN
# =============================================================================

LSHAPED_RHO0 = 2.0 * math.sqrt(2.0)
LSHAPED_MU = 5.0
LSHAPED_HALF_WIDTH = 5.0


class LShapedSolution:
    """
    u = rho^(2/3) sin(2 delta/3) for rho <= rho0, continued radially-linearly
    with matching flux a du/drho beyond, where a = 1 inside and mu outside.
    """

    def __init__(self, rho0: float = LSHAPED_RHO0, mu: float = LSHAPED_MU):
        self.rho0 = rho0
        self.mu = mu
        self.slope = 2.0 / (3.0 * mu) * rho0 ** (-1.0 / 3.0)

    @staticmethod
    def polar(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rho, delta, theta) with delta = 0 on the positive y-axis."""
        x, y = points[:, 0], points[:, 1]
        theta = np.arctan2(y, x)
        delta = np.mod(theta - 0.5 * np.pi, 2.0 * np.pi)
        return np.hypot(x, y), delta, theta

    def radial(self, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """g(rho) and g'(rho) with u = g(rho) sin(2 delta / 3)."""
        safe = np.maximum(rho, 1e-300)
        inside = rho <= self.rho0
        g = np.where(inside, safe ** (2.0 / 3.0), self.rho0 ** (2.0 / 3.0) + self.slope * (rho - self.rho0))
        dg = np.where(inside, (2.0 / 3.0) * safe ** (-1.0 / 3.0), self.slope)
        return g, dg

    def coefficient(self, points: np.ndarray) -> np.ndarray:
        return np.where(np.hypot(points[:, 0], points[:, 1]) <= self.rho0, 1.0, self.mu)

    def value(self, points: np.ndarray) -> np.ndarray:
        rho, delta, _ = self.polar(points)
        g, _ = self.radial(rho)
        return g * np.sin(2.0 * delta / 3.0)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        rho, delta, theta = self.polar(points)
        g, dg = self.radial(rho)
        radial = dg * np.sin(2.0 * delta / 3.0)
        angular = g * (2.0 / 3.0) * np.cos(2.0 * delta / 3.0) / np.maximum(rho, 1e-300)
        return _polar_to_cartesian(theta, radial, angular)

    def source(self, points: np.ndarray) -> np.ndarray:
        """f = -div(a grad u); zero where u is harmonic."""
        rho, delta, _ = self.polar(points)
        g, _ = self.radial(rho)
        safe = np.maximum(rho, 1e-300)
        outside = -self.mu * np.sin(2.0 * delta / 3.0) * (self.slope / safe - 4.0 * g / (9.0 * safe ** 2))
        return np.where(rho <= self.rho0, 0.0, outside)

    def interface(self, points: np.ndarray) -> np.ndarray:
        return np.hypot(points[:, 0], points[:, 1]) - self.rho0


def lshaped_case(rho0: float = LSHAPED_RHO0, mu: float = LSHAPED_MU) -> TestCase:
    solution = LShapedSolution(rho0, mu)
    oracle = CoefficientOracle(
        eval_A=_scalar_identity(solution.coefficient),
        eval_f=solution.source,
        r=1.0,
        M=mu,
        interface=solution.interface,
    )
    exact = ExactSolution(
        value=solution.value,
        gradient=solution.gradient,
        singular_points=[(0.0, 0.0)],
        interface=solution.interface,
    )
    return TestCase(
        name="lshaped",
        description="L-shaped domain, coefficient 1 / 5 jumping across a circle around the reentrant corner",
        mesh=lshape(LSHAPED_HALF_WIDTH),
        oracle=oracle,
        exact=exact,
        defaults={"eps0": 2.0, "omega": 0.8, "beta": 0.7, "q": 2.0},
    )


# =============================================================================
# TEST 2: KELLOGG CHECKERBOARD
# =============================================================================

KELLOGG_ALPHA = 0.25
KELLOGG_B = 25.27414236908818
KELLOGG_SIGMA = -5.49778714378214
KELLOGG_CENTER = (math.sqrt(2.0) / 10.0, math.sqrt(2.0) / 10.0)


class KelloggSolution:
    """u = rho^alpha mu(delta) in polar coordinates about the checkerboard centre."""

    def __init__(
        self,
        alpha: float = KELLOGG_ALPHA,
        b: float = KELLOGG_B,
        sigma: float = KELLOGG_SIGMA,
        center: tuple[float, float] = KELLOGG_CENTER
    ):
        self.alpha = alpha
        self.b = b
        self.sigma = sigma
        self.center = np.asarray(center, dtype=float)
        pi = math.pi
        # (amplitude, phase) per quarter [k pi/2, (k+1) pi/2)
        self.branches = np.array([
            (math.cos((pi / 2 - sigma) * alpha), pi / 4),
            (math.cos(pi / 4 * alpha), pi - sigma),
            (math.cos(alpha * sigma), 5 * pi / 4),
            (math.cos(pi / 4 * alpha), 3 * pi / 2 + sigma),
        ])

    def relation_residuals(self) -> np.ndarray:
        """Residuals of the three relations tying b, alpha and sigma."""
        a, b, s, pi = self.alpha, self.b, self.sigma, math.pi
        cot = lambda t: 1.0 / math.tan(t)
        return np.array([
            b + math.tan((pi / 2 - s) * a) * cot(pi / 4 * a),
            1.0 / b + math.tan(pi / 4 * a) * cot(s * a),
            b + math.tan(a * s) * cot(pi / 4 * a),
        ])

    def constraints_hold(self) -> bool:
        a, s, pi = self.alpha, self.sigma, math.pi
        first = max(0.0, pi * (a - 1)) < pi / 2 * a < min(pi * a, pi)
        second = max(0.0, pi * (1 - a)) < -2 * a * s < min(pi, pi * (2 - a))
        return first and second

    def polar(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        shifted = points - self.center
        rho = np.hypot(shifted[:, 0], shifted[:, 1])
        delta = np.mod(np.arctan2(shifted[:, 1], shifted[:, 0]), 2.0 * np.pi)
        return rho, delta

    def _branch(self, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        index = np.clip((delta // (0.5 * np.pi)).astype(int), 0, 3)
        return self.branches[index, 0], self.branches[index, 1]

    def angular(self, delta: np.ndarray) -> np.ndarray:
        amplitude, phase = self._branch(delta)
        return amplitude * np.cos((delta - phase) * self.alpha)

    def angular_derivative(self, delta: np.ndarray) -> np.ndarray:
        amplitude, phase = self._branch(delta)
        return -self.alpha * amplitude * np.sin((delta - phase) * self.alpha)

    def coefficient(self, points: np.ndarray) -> np.ndarray:
        cx, cy = self.center
        return np.where((points[:, 0] - cx) * (points[:, 1] - cy) >= 0, self.b, 1.0)

    def value(self, points: np.ndarray) -> np.ndarray:
        rho, delta = self.polar(points)
        return rho ** self.alpha * self.angular(delta)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        rho, delta = self.polar(points)
        scale = np.maximum(rho, 1e-300) ** (self.alpha - 1.0)
        radial = self.alpha * scale * self.angular(delta)
        angular = scale * self.angular_derivative(delta)
        theta = np.arctan2(points[:, 1] - self.center[1], points[:, 0] - self.center[0])
        return _polar_to_cartesian(theta, radial, angular)

    def interface(self, points: np.ndarray) -> np.ndarray:
        cx, cy = self.center
        return (points[:, 0] - cx) * (points[:, 1] - cy)


def kellogg_case(
    alpha: float = KELLOGG_ALPHA,
    b: float = KELLOGG_B,
    sigma: float = KELLOGG_SIGMA
) -> TestCase:
    solution = KelloggSolution(alpha, b, sigma)
    center = tuple(float(c) for c in solution.center)
    oracle = CoefficientOracle(
        eval_A=_scalar_identity(solution.coefficient),
        eval_f=lambda points: np.zeros(len(points)),
        r=1.0,
        M=b,
        interface=solution.interface,
    )
    exact = ExactSolution(
        value=solution.value,
        gradient=solution.gradient,
        singular_points=[center],
        interface=solution.interface,
    )
    return TestCase(
        name="kellogg",
        description="Checkerboard coefficient 1 / b on (-1,1)^2 with an off-grid centre, f = 0",
        mesh=centered_square(1.0),
        oracle=oracle,
        exact=exact,
        defaults={"eps0": 2.0, "omega": 0.8, "beta": 0.7, "q": 2.0},
    )


# =============================================================================
# SMOOTH BASELINE
# =============================================================================

def _smooth_value(points: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * points[:, 0]) * np.sin(np.pi * points[:, 1])


def _smooth_gradient(points: np.ndarray) -> np.ndarray:
    x, y = np.pi * points[:, 0], np.pi * points[:, 1]
    return np.pi * np.stack([np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)], axis=1)


def smooth_case(eps0: Optional[float] = None) -> TestCase:
    oracle = CoefficientOracle(
        eval_A=_scalar_identity(lambda points: np.ones(len(points))),
        eval_f=lambda points: 2.0 * np.pi ** 2 * _smooth_value(points),
        r=1.0,
        M=1.0,
    )
    exact = ExactSolution(value=_smooth_value, gradient=_smooth_gradient)
    return TestCase(
        name="smooth",
        description="Unit square, Laplacian, u = sin(pi x) sin(pi y)",
        mesh=unit_square(),
        oracle=oracle,
        exact=exact,
        defaults={"eps0": 2.0 if eps0 is None else eps0, "omega": 0.8, "beta": 0.7, "q": 2.0},
    )
