"""
Local polynomial approximation errors E(g, T)_{Lq}.

For q < inf the approximant is the L2 projection onto polynomials of degree
0 or 1 and its residual is measured in Lq by adaptive quadrature. For
q = inf the residual is sampled on a barycentric lattice and shifted by its
midrange, so the error is the half range of the samples.

Fields may have several components (e.g. the three entries of a symmetric
matrix); the component errors are combined in the discrete lq norm.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from config.settings import settings
from src.core.errors import ApproximationError
from src.fem.fields import barycentric
from src.mesh.forest import triangle_areas, triangle_diameters
from src.quadrature.adaptive import integrate_adaptive_batch

# (n, 2) -> (n,) or (n, c)
Field = Callable[[np.ndarray], np.ndarray]

# Inverse P1 mass matrix on T, times |T|
MASS_INVERSE = 3.0 * np.array([[3.0, -1.0, -1.0], [-1.0, 3.0, -1.0], [-1.0, -1.0, 3.0]])


@dataclass
class LocalError:
    """Error of the best local approximant on one element."""
    element: int
    value: float
    approximant: np.ndarray     # vertex values (3,) or (3, c)


def check_exponent(q: float):
    if not q >= 2:
        raise ApproximationError(f"Lq approximation needs q >= 2, got {q}", {"q": q})


def check_degree(degree: int):
    if degree not in (0, 1):
        raise ApproximationError(f"Approximant degree must be 0 or 1, got {degree}", {"degree": degree})


def _components(g: Field) -> Callable[[np.ndarray], np.ndarray]:
    def wrapped(points: np.ndarray) -> np.ndarray:
        values = np.asarray(g(points), dtype=float)
        return values[:, None] if values.ndim == 1 else values
    return wrapped


@lru_cache(maxsize=8)
def sample_lattice(order: int) -> np.ndarray:
    """Barycentric lattice points (i, j, k) / order with i + j + k = order."""
    points = [(i, j, order - i - j) for i in range(order + 1) for j in range(order + 1 - i)]
    return np.array(points, dtype=float) / order


def l2_projection(
    g: Field,
    corners: np.ndarray,
    degree: int,
    tol: Optional[float] = None,
    max_depth: Optional[int] = None
) -> np.ndarray:
    """
    Elementwise L2 projection.

    Returns:
        Vertex values, shape (m, 3, c)
    """
    tol = settings.approx_quad_tol if tol is None else tol
    max_depth = settings.approx_quad_max_depth if max_depth is None else max_depth
    g = _components(g)
    areas = triangle_areas(corners)

    if degree == 0:
        integrals = integrate_adaptive_batch(g, corners, tol, max_depth).values       # (m, c)
        means = integrals / areas[:, None]
        return np.repeat(means[:, None, :], 3, axis=1)

    def moments(points: np.ndarray, owner: np.ndarray) -> np.ndarray:
        lam = barycentric(corners[owner], points[:, None, :])[:, 0]               # (n, 3)
        return g(points)[:, None, :] * lam[:, :, None]                             # (n, 3, c)

    integrals = integrate_adaptive_batch(moments, corners, tol, max_depth, indexed=True).values
    return np.einsum("ij,mjc->mic", MASS_INVERSE, integrals) / areas[:, None, None]


def lq_residual_errors(
    g: Field,
    corners: np.ndarray,
    vertex_values: np.ndarray,
    q: float,
    tol: Optional[float] = None,
    max_depth: Optional[int] = None
) -> np.ndarray:
    """(sum_c int_T |g_c - P_c|^q)^{1/q} per element, q finite."""
    tol = settings.approx_quad_tol if tol is None else tol
    max_depth = settings.approx_quad_max_depth if max_depth is None else max_depth
    g = _components(g)

    def residual(points: np.ndarray, owner: np.ndarray) -> np.ndarray:
        lam = barycentric(corners[owner], points[:, None, :])[:, 0]
        approximant = np.einsum("nv,nvc->nc", lam, vertex_values[owner])
        return np.sum(np.abs(g(points) - approximant) ** q, axis=1)

    integrals = integrate_adaptive_batch(residual, corners, tol, max_depth, indexed=True).values
    return np.maximum(integrals, 0.0) ** (1.0 / q)


def linf_fit(g: Field, corners: np.ndarray, degree: int, order: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Sampled minimax fit: midrange for degree 0, L2 projection plus midrange
    shift of the residual for degree 1.

    Returns:
        (errors (m,), vertex values (m, 3, c))
    """
    order = settings.linf_sample_order if order is None else order
    g = _components(g)
    lattice = sample_lattice(order)                                               # (k, 3)
    points = np.einsum("kj,mjd->mkd", lattice, corners)
    m, k = points.shape[:2]
    samples = g(points.reshape(-1, 2)).reshape(m, k, -1)                           # (m, k, c)

    if degree == 0:
        base = np.zeros((m, 3, samples.shape[2]))
    else:
        base = l2_projection(g, corners, 1)
    residual = samples - np.einsum("kv,mvc->mkc", lattice, base)
    high, low = residual.max(axis=1), residual.min(axis=1)                        # (m, c)
    values = base + (0.5 * (high + low))[:, None, :]
    errors = (0.5 * (high - low)).max(axis=1)
    return errors, values


def local_errors(
    g: Field,
    corners: np.ndarray,
    q: float,
    degree: int,
    tol: Optional[float] = None,
    max_depth: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Local errors and approximants on a batch of triangles.

    Args:
        g: Vectorised field, (n, 2) -> (n,) or (n, c)
        corners: (m, 3, 2)
        q: Exponent in [2, inf]
        degree: Approximant degree, 0 or 1

    Returns:
        (errors (m,), vertex values (m, 3, c))
    """
    check_exponent(q)
    check_degree(degree)
    corners = np.asarray(corners, dtype=float)
    if np.isinf(q):
        return linf_fit(g, corners, degree)
    values = l2_projection(g, corners, degree, tol, max_depth)
    return lq_residual_errors(g, corners, values, q, tol, max_depth), values


def oscillation_errors(f: Field, corners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """diam(T) ||f - mean_T f||_{L2(T)} per element, with the means as approximant."""
    errors, values = local_errors(f, corners, 2.0, 0)
    return triangle_diameters(corners) * errors, values


def local_best(g: Field, triangle: np.ndarray, q: float, degree: int, element: int = -1) -> LocalError:
    """
    Best local approximation of a scalar field on one triangle.

    Args:
        g: Vectorised scalar field
        triangle: (3, 2) corners
        q: Exponent in [2, inf]
        degree: 0 or 1
        element: Element id recorded in the result
    """
    errors, values = local_errors(g, np.asarray(triangle, dtype=float)[None], q, degree)
    return LocalError(element=element, value=float(errors[0]), approximant=values[0, :, 0])
