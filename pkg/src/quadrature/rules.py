"""
Symmetric quadrature rules on triangles.

Rules are stored in barycentric coordinates with weights summing to 1; the
triangle area is applied at the use site:

    integral over T of f  =  area(T) * sum_i w_i f(x_i)

Points and weights from Dunavant (1985), assembled from symmetry orbits.
"""
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Optional

import numpy as np

from src.core.errors import QuadratureError
from src.mesh.forest import triangle_areas

# Vectorised integrand: (n, 2) points -> (n,), (n, k) or (n, 2, 2)
Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric quadrature rule on a triangle."""
    points: np.ndarray      # (k, 3) barycentric triples
    weights: np.ndarray     # (k,), sum = 1
    degree: int             # exactness degree

    def __len__(self) -> int:
        return len(self.weights)

    def physical_points(self, corners: np.ndarray) -> np.ndarray:
        """Map the rule onto triangles given as (m, 3, 2) corners -> (m, k, 2)."""
        return np.einsum("kj,mjd->mkd", self.points, corners)


def _orbit_s3(weight: float) -> list[tuple[tuple[float, float, float], float]]:
    third = 1.0 / 3.0
    return [((third, third, third), weight)]


def _orbit_s21(a: float, weight: float) -> list[tuple[tuple[float, float, float], float]]:
    b = 1.0 - 2.0 * a
    return [((a, a, b), weight), ((a, b, a), weight), ((b, a, a), weight)]


def _orbit_s111(a: float, b: float, weight: float) -> list[tuple[tuple[float, float, float], float]]:
    c = 1.0 - a - b
    return [(p, weight) for p in sorted(set(permutations((a, b, c))))]


def _rule(orbits: list, degree: int) -> QuadratureRule:
    points = np.array([p for p, _ in orbits], dtype=float)
    weights = np.array([w for _, w in orbits], dtype=float)
    return QuadratureRule(points=points, weights=weights / weights.sum(), degree=degree)


CENTROID = _rule(_orbit_s3(1.0), degree=1)

# Edge midpoints
EDGE_MIDPOINT = _rule(_orbit_s21(0.5, 1.0 / 3.0), degree=2)

DUNAVANT_4 = _rule(
    _orbit_s21(0.445948490915965, 0.223381589678011)
    + _orbit_s21(0.091576213509771, 0.109951743655322),
    degree=4
)

DUNAVANT_6 = _rule(
    _orbit_s21(0.249286745170910, 0.116786275726379)
    + _orbit_s21(0.063089014491502, 0.050844906370207)
    + _orbit_s111(0.310352451033784, 0.053145049844817, 0.082851075618374),
    degree=6
)

DUNAVANT_8 = _rule(
    _orbit_s3(0.144315607677787)
    + _orbit_s21(0.459292588292723, 0.095091634267285)
    + _orbit_s21(0.170569307751760, 0.103217370534718)
    + _orbit_s21(0.050547228317031, 0.032458497623198)
    + _orbit_s111(0.263112829634638, 0.008394777409958, 0.027230314174435),
    degree=8
)

RULES: dict[int, QuadratureRule] = {
    1: CENTROID,
    2: EDGE_MIDPOINT,
    4: DUNAVANT_4,
    6: DUNAVANT_6,
    8: DUNAVANT_8,
}


def get_rule(degree: int) -> QuadratureRule:
    """Cheapest rule exact for polynomials of the given degree."""
    for exact in sorted(RULES):
        if exact >= degree:
            return RULES[exact]
    raise QuadratureError(f"No rule of degree {degree}", {"max_degree": max(RULES)})


def evaluate_on_elements(
    fn: Integrand,
    corners: np.ndarray,
    rule: QuadratureRule,
    owners: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Integrand values at the rule points of each triangle, shape (m, k, ...).

    With `owners`, fn is called as fn(points, owner_per_point) so it can use
    element-local data.
    """
    points = rule.physical_points(corners)
    m, k = points.shape[:2]
    flat = points.reshape(-1, 2)
    if owners is None:
        values = np.asarray(fn(flat), dtype=float)
    else:
        values = np.asarray(fn(flat, np.repeat(owners, k)), dtype=float)
    return values.reshape(m, k, *values.shape[1:])


def integrate_elements(
    fn: Integrand,
    corners: np.ndarray,
    rule: QuadratureRule = DUNAVANT_4,
    owners: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Integrate over many triangles at once.

    Args:
        fn: Vectorised integrand
        corners: Triangle corners, shape (m, 3, 2)
        rule: Quadrature rule
        owners: Optional per-triangle index forwarded to fn

    Returns:
        Integrals, shape (m,) or (m, ...) for vector/matrix-valued fn
    """
    corners = np.asarray(corners, dtype=float)
    values = evaluate_on_elements(fn, corners, rule, owners)
    sums = np.tensordot(rule.weights, values, axes=([0], [1]))
    area = triangle_areas(corners)
    return sums * area.reshape(-1, *([1] * (sums.ndim - 1)))


def integrate(fn: Integrand, triangle: np.ndarray, rule: QuadratureRule = DUNAVANT_4):
    """Integrate over a single triangle given as a (3, 2) corner array."""
    result = integrate_elements(fn, np.asarray(triangle, dtype=float)[None], rule)[0]
    return float(result) if np.ndim(result) == 0 else result
