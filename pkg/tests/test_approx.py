"""
Tests for local approximation, GREEDY, COEFF, RHS and the Meyers helpers.
"""
import math

import numpy as np
import pytest

from src.approx import coeff, greedy, local_best, local_errors, rhs
from src.approx.coeff import IDENTITY, KEEP, SHIFT, repair_field, repair_positivity
from src.approx.greedy import aggregate
from src.approx.meyers import (
    MeyersParams,
    conjugate_exponent,
    exponent_from_weight,
    interpolation_weight,
    meyers_range,
)
from src.approx.oracle import CoefficientOracle
from src.bench.cases import lshaped_case, smooth_case
from src.bench.eoc import loglog_slope
from src.core.errors import ApproximationError, GreedyNonConvergenceError
from src.fem.fields import symmetric_eigenvalues
from src.mesh import unit_square

REFERENCE = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])


def quadratic(points: np.ndarray) -> np.ndarray:
    return points[:, 0] ** 2 + points[:, 0] * points[:, 1] - points[:, 1]


def step(points: np.ndarray) -> np.ndarray:
    return (points[:, 0] + points[:, 1] > 0.7).astype(float)


# ===========================================
# Local approximation
# ===========================================

@pytest.mark.parametrize("q", [2.0, 3.0, np.inf])
@pytest.mark.parametrize("degree", [0, 1])
def test_constant_is_reproduced(q, degree):
    errors, values = local_errors(lambda x: np.full(len(x), 3.0), REFERENCE, q, degree)
    assert errors[0] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(values[0, :, 0], 3.0, atol=1e-12)


@pytest.mark.parametrize("q", [2.0, 4.0, np.inf])
def test_linear_is_reproduced_by_degree_one(q):
    errors, values = local_errors(lambda x: 1.0 + x[:, 0] - 2.0 * x[:, 1], REFERENCE, q, 1)
    assert errors[0] == pytest.approx(0.0, abs=1e-10)
    np.testing.assert_allclose(values[0, :, 0], [1.0, 2.0, -1.0], atol=1e-10)


def test_l2_mean_error():
    # int_T (x - 1/3)^2 = 1/36 on the reference triangle
    errors, values = local_errors(lambda x: x[:, 0], REFERENCE, 2.0, 0)
    assert values[0, 0, 0] == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert errors[0] == pytest.approx(1.0 / 6.0, rel=1e-10)


def test_linf_midrange():
    errors, values = local_errors(lambda x: x[:, 0], REFERENCE, np.inf, 0)
    assert errors[0] == pytest.approx(0.5)
    assert values[0, 0, 0] == pytest.approx(0.5)


def test_local_best_on_single_triangle():
    best = local_best(lambda x: 5.0 * np.ones(len(x)), REFERENCE[0], 2.0, 0, element=7)
    assert best.element == 7
    assert best.value == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(best.approximant, 5.0)

    jump = local_best(lambda x: 4.0 * (x[:, 0] > 0.25), REFERENCE[0], np.inf, 0)
    assert jump.value >= 2.0


def test_vector_valued_error_is_max_over_components():
    errors, _ = local_errors(lambda x: np.stack([x[:, 0], 3.0 * x[:, 0]], axis=1), REFERENCE, np.inf, 0)
    assert errors[0] == pytest.approx(1.5)


@pytest.mark.parametrize("q, degree", [(1.5, 0), (2.0, 2)])
def test_local_errors_validate_arguments(q, degree):
    with pytest.raises(ApproximationError):
        local_errors(quadratic, REFERENCE, q, degree)


def test_bisection_never_increases_l2_error(square_forest, rng):
    forest = square_forest
    forest.refine_uniform(2)
    for _ in range(60):
        eid = int(rng.choice(forest.active_elements()))
        parent, _ = local_errors(quadratic, forest.element_coords([eid]), 2.0, 0)
        children = forest.bisect(eid)
        split, _ = local_errors(quadratic, forest.element_coords(list(children)), 2.0, 0)
        assert np.sum(split ** 2) <= parent[0] ** 2 * (1 + 1e-12) + 1e-15


def test_aggregate():
    errors = np.array([3.0, 4.0])
    assert aggregate(errors, 2.0) == pytest.approx(5.0)
    assert aggregate(errors, np.inf) == 4.0
    assert aggregate(np.array([]), 2.0) == 0.0


# ===========================================
# GREEDY
# ===========================================

def quadratic_errors(q: float, degree: int = 0):
    return lambda corners: local_errors(quadratic, corners, q, degree)


@pytest.mark.parametrize("q", [2.0, 4.0, np.inf])
def test_greedy_reaches_tolerance_on_conforming_partition(square_forest, q):
    result = greedy(square_forest, quadratic_errors(q), 0.1, q, max_elements=5000)
    assert result.error <= 0.1
    assert square_forest.is_conforming()
    np.testing.assert_array_equal(result.partition, square_forest.active_elements())
    assert result.values.shape == (len(result.partition), 3, 1)
    assert result.marked > 0


def test_greedy_history_is_monotone(square_forest):
    result = greedy(square_forest, quadratic_errors(2.0), 0.05, 2.0, max_elements=5000, record_history=True)
    history = np.array(result.history)
    assert len(history) == result.marked + 1
    assert np.all(np.diff(history) <= 1e-12 * history[0])


@pytest.mark.parametrize("q, eps", [(2.0, 0.05), (np.inf, 0.1)])
def test_greedy_restart_from_intermediate_tree(q, eps):
    direct = unit_square().to_forest()
    greedy(direct, quadratic_errors(q), eps, q, max_elements=5000)

    restarted = unit_square().to_forest()
    with pytest.raises(GreedyNonConvergenceError):
        greedy(restarted, quadratic_errors(q), eps, q, max_elements=20)
    greedy(restarted, quadratic_errors(q), eps, q, max_elements=5000)

    assert sorted(restarted.labels(restarted.active_elements())) == sorted(direct.labels(direct.active_elements()))


def test_greedy_accepts_tolerance_already_met(square_forest):
    result = greedy(square_forest, quadratic_errors(2.0), 10.0, 2.0)
    assert result.marked == 0
    assert len(result.partition) == 2


def test_greedy_rejects_nonpositive_tolerance(square_forest):
    with pytest.raises(ApproximationError):
        greedy(square_forest, quadratic_errors(2.0), 0.0, 2.0)


def test_greedy_reports_floor_for_discontinuity(square_forest):
    # Every element meeting x + y = 0.7 samples both sides of the jump
    with pytest.raises(GreedyNonConvergenceError) as info:
        greedy(square_forest, lambda c: local_errors(step, c, np.inf, 0), 0.1, np.inf, max_elements=60)
    assert info.value.floor == pytest.approx(0.5)
    assert info.value.elements >= 60
    assert info.value.tolerance == 0.1


def test_greedy_l2_converges_for_discontinuity(square_forest):
    result = greedy(square_forest, lambda c: local_errors(step, c, 2.0, 0), 0.1, 2.0, max_elements=20000)
    assert result.error <= 0.1


def test_greedy_rate_for_smooth_function():
    elements, errors = [], []
    for eps in (0.04, 0.02, 0.01, 0.005):
        forest = unit_square().to_forest()
        result = greedy(forest, lambda c: local_errors(lambda p: p[:, 0], c, 2.0, 0), eps, 2.0, max_elements=50000)
        elements.append(len(result.partition))
        errors.append(result.error)

    assert elements == sorted(elements)
    assert loglog_slope(elements, errors) == pytest.approx(-0.5, abs=0.1)


def test_rhs_oscillation_rate_for_smooth_source():
    oracle = CoefficientOracle(
        eval_A=lambda x: np.broadcast_to(np.eye(2), (len(x), 2, 2)).copy(),
        eval_f=lambda x: x[:, 0].copy(),
        r=1.0,
        M=1.0,
    )
    elements, oscillations = [], []
    for eps in (4e-3, 2e-3, 1e-3, 5e-4):
        result = rhs(unit_square().to_forest(), oracle, eps, max_elements=50000)
        elements.append(len(result.partition))
        oscillations.append(result.oscillation)

    assert elements == sorted(elements)
    assert loglog_slope(elements, oscillations) == pytest.approx(-1.0, abs=0.15)


# ===========================================
# Positivity repair
# ===========================================

def test_repair_bounds_on_adversarial_fields(rng):
    r, M, C = 1.0, 5.0, 4.0
    values = rng.uniform(-30.0, 30.0, size=(500, 3, 3))
    repaired, branch = repair_field(values, r, M, C)
    eig = symmetric_eigenvalues(repaired)
    assert eig[..., 0].min() >= r / 2 - 1e-12
    assert eig[..., 1].max() <= C * M + 0.75 * r + 1e-12

    # Affine interpolation keeps the bounds inside the element
    lam = rng.dirichlet(np.ones(3), size=20)
    inner = np.einsum("kv,mvc->mkc", lam, repaired)
    inner_eig = symmetric_eigenvalues(inner)
    assert inner_eig[..., 0].min() >= r / 2 - 1e-12
    assert inner_eig[..., 1].max() <= C * M + 0.75 * r + 1e-12
    assert set(np.unique(branch)) <= {KEEP, IDENTITY, SHIFT}


def test_repair_large_matrix_falls_back_to_identity():
    r, M = 1.0, 5.0
    repaired = repair_positivity(np.diag([10.0 * M, 10.0 * M]), r, M)
    np.testing.assert_allclose(repaired, r * np.eye(2))


def test_repair_keeps_admissible_matrix():
    B = np.array([[1.0, 0.0], [0.0, 5.0]])
    np.testing.assert_allclose(repair_positivity(B, 1.0, 5.0), B)


def test_repair_shifts_singular_matrix():
    repaired = repair_positivity(np.diag([0.0, 5.0]), 1.0, 5.0)
    np.testing.assert_allclose(repaired, np.diag([0.75, 5.75]))


def test_repair_constant_must_be_at_least_four():
    with pytest.raises(ApproximationError):
        repair_field(np.zeros((1, 3, 3)), 1.0, 5.0, C=3.0)


# ===========================================
# COEFF and RHS
# ===========================================

def test_coeff_meanvalues_inherit_exact_bounds(lshape_forest):
    case = lshaped_case()
    result = coeff(lshape_forest, case.oracle, 4.0, 2.0, 0, max_elements=20000)
    assert result.error <= 4.0
    assert result.A_hat.r_hat == case.oracle.r
    assert result.A_hat.M_hat == case.oracle.M
    assert result.repairs["keep"] == len(result.partition)
    eig = symmetric_eigenvalues(result.A_hat.values)
    assert eig[..., 0].min() >= case.oracle.r - 1e-9
    assert eig[..., 1].max() <= case.oracle.M + 1e-9


def test_coeff_degree_one_is_repaired(lshape_forest):
    case = lshaped_case()
    result = coeff(lshape_forest, case.oracle, 4.0, 2.0, 1, max_elements=20000)
    r, M = case.oracle.r, case.oracle.M
    assert result.A_hat.r_hat >= r / 2 - 1e-12
    assert result.A_hat.M_hat <= 4.0 * M + 0.75 * r + 1e-12
    assert sum(result.repairs.values()) == len(result.partition)


def test_coeff_linf_stalls_at_interface_jump():
    case = lshaped_case()
    forest = case.initial_forest()
    forest.refine_uniform(4)
    corners = forest.element_coords()
    errors, _ = local_errors(case.oracle.entries, corners, np.inf, 0)
    sides = case.exact.interface(corners.reshape(-1, 2)).reshape(-1, 3)
    straddling = (sides.min(axis=1) < 0) & (sides.max(axis=1) > 0)
    assert straddling.any()
    assert errors[straddling].min() >= 2.0 - 1e-12

    with pytest.raises(GreedyNonConvergenceError) as info:
        coeff(forest, case.oracle, 1.9, np.inf, 0, max_elements=forest.n_active + 200)
    assert info.value.floor >= 2.0 - 1e-12


def test_rhs_oscillation_within_tolerance():
    case = smooth_case()
    forest = case.initial_forest()
    result = rhs(forest, case.oracle, 0.5, max_elements=20000)
    assert result.oscillation <= 0.5
    assert result.f_hat.degree == 0
    assert result.f_hat.values.shape == (len(result.partition), 3)
    assert forest.is_conforming()


# ===========================================
# Meyers arithmetic
# ===========================================

def test_conjugate_exponent():
    assert conjugate_exponent(np.inf) == 2.0
    assert conjugate_exponent(4.0) == pytest.approx(4.0)
    assert conjugate_exponent(6.0) == pytest.approx(3.0)
    with pytest.raises(ApproximationError):
        conjugate_exponent(2.0)


def test_interpolation_weight_round_trip():
    P = 6.0
    assert interpolation_weight(2.0, P) == pytest.approx(0.0)
    assert interpolation_weight(P, P) == pytest.approx(1.0)
    assert exponent_from_weight(interpolation_weight(3.0, P), P) == pytest.approx(3.0)


def test_meyers_range_without_norm_growth():
    params = MeyersParams(P=6.0, K=1.0, r=1.0, M=5.0)
    result = meyers_range(params)
    assert result.eta_star == 1.0
    assert result.p_star == pytest.approx(6.0)
    # K = 1: C(p) = 1 / (M (1 - (1 - r/M))) = 1 / r
    assert result.constant(3.0) == pytest.approx(1.0)


def test_meyers_range_with_norm_growth():
    params = MeyersParams(P=6.0, K=2.0, r=1.0, M=5.0)
    result = meyers_range(params)
    assert result.eta_star == pytest.approx(math.log(1.25) / math.log(2.0))
    assert 2.0 < result.p_star < 6.0
    assert result.constant(2.0) == pytest.approx(1.0)
    with pytest.raises(ApproximationError):
        result.constant(result.p_star + 0.1)
