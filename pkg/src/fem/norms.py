"""
Error norms of discrete solutions against exact data.

Elements containing a declared singular point, or crossed by a declared
interface level set, are integrated adaptively; all others use the fixed
degree-8 rule.
"""
from typing import Callable, Optional, Sequence

import numpy as np

from config.settings import settings
from src.fem.fields import barycentric
from src.fem.space import P1Space
from src.quadrature.adaptive import integrate_adaptive_batch
from src.quadrature.rules import DUNAVANT_8, integrate_elements

VectorField = Callable[[np.ndarray], np.ndarray]
LevelSet = Callable[[np.ndarray], np.ndarray]


def singular_elements(corners: np.ndarray, points: Sequence[Sequence[float]]) -> np.ndarray:
    """Mask of triangles containing (or touching) any of the points."""
    mask = np.zeros(len(corners), dtype=bool)
    for point in points:
        target = np.broadcast_to(np.asarray(point, dtype=float), (len(corners), 1, 2))
        lam = barycentric(corners, target)[:, 0]
        mask |= np.all(lam >= -1e-12, axis=1)
    return mask


def interface_elements(corners: np.ndarray, level_set: Optional[LevelSet]) -> np.ndarray:
    """Mask of triangles where the level set changes sign at corners or rule points."""
    if level_set is None:
        return np.zeros(len(corners), dtype=bool)
    samples = np.concatenate([corners, DUNAVANT_8.physical_points(corners)], axis=1)
    values = np.asarray(level_set(samples.reshape(-1, 2))).reshape(len(corners), -1)
    return (values.min(axis=1) <= 0) & (values.max(axis=1) >= 0)


def integrate_piecewise(
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    corners: np.ndarray,
    singular_points: Sequence[Sequence[float]] = (),
    interface: Optional[LevelSet] = None
) -> np.ndarray:
    """
    Per-element integrals of an element-aware integrand fn(points, element).

    Returns:
        (m,) integrals
    """
    singular = singular_elements(corners, singular_points)
    crossing = interface_elements(corners, interface) & ~singular
    regular = ~(singular | crossing)

    values = np.zeros(len(corners))
    ids = np.nonzero(regular)[0]
    if ids.size:
        values[ids] = integrate_elements(integrand, corners[ids], DUNAVANT_8, ids)

    for mask, depth in ((singular, settings.singular_quad_max_depth), (crossing, settings.error_quad_max_depth)):
        ids = np.nonzero(mask)[0]
        if ids.size == 0:
            continue
        result = integrate_adaptive_batch(
            lambda x, e, ids=ids: integrand(x, ids[e]),
            corners[ids],
            tol=settings.error_quad_tol,
            max_depth=depth,
            rule=DUNAVANT_8,
            indexed=True,
            rel_tol=settings.error_quad_rel_tol,
        )
        values[ids] = result.values
    return values


def h1_error_squared(
    space: P1Space,
    U: np.ndarray,
    grad_exact: VectorField,
    singular_points: Sequence[Sequence[float]] = (),
    interface: Optional[LevelSet] = None
) -> np.ndarray:
    """Per-element ||grad u - grad U||^2_{L2(T)}."""
    g = space.element_gradients(U)

    def integrand(x: np.ndarray, elements: np.ndarray) -> np.ndarray:
        diff = np.asarray(grad_exact(x)) - g[elements]
        return np.sum(diff ** 2, axis=1)

    return integrate_piecewise(integrand, space.corners, singular_points, interface)


def h1_seminorm_error(
    space: P1Space,
    U: np.ndarray,
    grad_exact: VectorField,
    singular_points: Sequence[Sequence[float]] = (),
    interface: Optional[LevelSet] = None
) -> float:
    """
    ||grad(u - U)||_{L2(Omega)}.

    Args:
        space: P1 space of U
        U: Full dof vector
        grad_exact: Vectorised exact gradient, (n, 2) -> (n, 2)
        singular_points: Points where grad u is singular
        interface: Level set whose zero set carries a kink of u
    """
    squared = h1_error_squared(space, U, grad_exact, singular_points, interface)
    return float(np.sqrt(max(squared.sum(), 0.0)))


def discrete_gradient_norm(space: P1Space, U: np.ndarray, p: float = 2.0) -> float:
    """||grad U||_{Lp(Omega)} for a P1 function (exact, gradients are constant)."""
    magnitude = np.linalg.norm(space.element_gradients(U), axis=1)
    if np.isinf(p):
        return float(magnitude.max()) if magnitude.size else 0.0
    return float(np.sum(space.areas * magnitude ** p) ** (1.0 / p))
