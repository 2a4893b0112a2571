"""
Tests for the benchmark problems, EOC, grading and the experiment runner.
"""
import math

import numpy as np
import pandas as pd
import pytest

from config.settings import settings
from src.approx.oracle import CoefficientOracle
from src.bench import annulus_grading, case_names, eoc, get_case, loglog_slope, window_slopes
from src.bench.cases import KelloggSolution, LShapedSolution, TestCase, kellogg_case, lshaped_case, smooth_case
from src.bench.experiment import build_parser, make_config, run_experiment
from src.bench.registry import CASES, CaseEntry
from src.core.errors import DiscError, MeshError, UnknownCaseError
from src.disc.config import ExactSolution
from src.fem import P1Space
from src.fem.fields import barycentric
from src.fem.norms import integrate_piecewise

MAX_CLOSURE_OVERHEAD = 10.0


def radial_derivative(solution, points: np.ndarray) -> np.ndarray:
    grad = solution.gradient(points)
    return np.sum(grad * points, axis=1) / np.linalg.norm(points, axis=1)


def laplacian(u, points: np.ndarray, h: float = 1e-4) -> np.ndarray:
    total = -4.0 * u(points)
    for shift in ([h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]):
        total += u(points + np.array(shift))
    return total / h ** 2


# ===========================================
# L-shaped benchmark
# ===========================================

@pytest.fixture
def interface_points():
    solution = LShapedSolution()
    theta = np.linspace(0.6, 2.0 * math.pi - 0.6, 7) + 0.5 * math.pi
    unit = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return solution, unit


def test_lshaped_value_and_flux_match_across_circle(interface_points):
    solution, unit = interface_points
    inner = solution.rho0 * (1.0 - 1e-10) * unit
    outer = solution.rho0 * (1.0 + 1e-10) * unit

    np.testing.assert_allclose(solution.value(inner), solution.value(outer), atol=1e-8)
    flux_inner = solution.coefficient(inner) * radial_derivative(solution, inner)
    flux_outer = solution.coefficient(outer) * radial_derivative(solution, outer)
    np.testing.assert_allclose(flux_inner, flux_outer, rtol=1e-6, atol=1e-10)
    assert solution.coefficient(inner).tolist() == [1.0] * 7
    assert solution.coefficient(outer).tolist() == [5.0] * 7


def test_lshaped_vanishes_on_reentrant_edges():
    solution = LShapedSolution()
    s = np.linspace(0.1, 5.0, 9)
    on_y_axis = np.stack([np.zeros_like(s), s], axis=1)
    on_x_axis = np.stack([s, np.zeros_like(s)], axis=1)
    np.testing.assert_allclose(solution.value(on_y_axis), 0.0, atol=1e-12)
    np.testing.assert_allclose(solution.value(on_x_axis), 0.0, atol=1e-12)


def test_lshaped_source_matches_laplacian():
    solution = LShapedSolution()
    outside = np.array([[-3.5, 1.0], [-2.0, -3.0], [1.5, -3.5]])
    np.testing.assert_allclose(
        -solution.mu * laplacian(solution.value, outside), solution.source(outside), rtol=1e-4, atol=1e-6
    )
    inside = np.array([[-1.0, 0.5], [-0.5, -1.5]])
    np.testing.assert_allclose(laplacian(solution.value, inside), 0.0, atol=1e-5)
    np.testing.assert_array_equal(solution.source(inside), 0.0)


# ===========================================
# Kellogg benchmark
# ===========================================

def test_kellogg_parameters_satisfy_relations():
    solution = KelloggSolution()
    assert np.abs(solution.relation_residuals()).max() < 1e-8
    assert solution.constraints_hold()


def test_kellogg_angular_part_is_continuous_with_matching_flux():
    solution = KelloggSolution()
    coefficients = [solution.b, 1.0, solution.b, 1.0]
    tiny = 1e-12
    for k in range(4):
        edge = k * 0.5 * math.pi
        before = np.array([(edge - tiny) % (2.0 * math.pi)])
        after = np.array([edge + tiny])
        assert solution.angular(before)[0] == pytest.approx(solution.angular(after)[0], abs=1e-9)
        flux_before = coefficients[k - 1] * solution.angular_derivative(before)[0]
        flux_after = coefficients[k] * solution.angular_derivative(after)[0]
        assert flux_before == pytest.approx(flux_after, rel=1e-6, abs=1e-9)


def test_kellogg_coefficient_quadrants():
    solution = KelloggSolution()
    c = solution.center
    points = c + np.array([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])
    assert solution.coefficient(points).tolist() == [solution.b, 1.0, solution.b, 1.0]


@pytest.mark.parametrize("name", ["lshaped", "kellogg", "smooth"])
def test_oracle_respects_declared_bounds(rng, name):
    case = get_case(name)
    points = rng.uniform(-1.0, 1.0, size=(400, 2)) * (5.0 if name == "lshaped" else 1.0)
    low, high = case.oracle.eigenvalue_range(points)
    assert case.oracle.r <= low <= high <= case.oracle.M


def test_smooth_source_is_scaled_solution():
    case = smooth_case()
    points = np.array([[0.3, 0.4], [0.5, 0.5], [0.9, 0.2]])
    np.testing.assert_allclose(case.oracle.eval_f(points) / case.exact.value(points), 2.0 * math.pi ** 2)


def weak_form_residual(case: TestCase, levels: int, source_scale: float = 1.0) -> float:
    """
    |a(u, v) - (f, v)| relative to the integral of the absolute integrand,
    for the P1 test function v interpolating 1 + |x|^2 inside and vanishing on the boundary.
    """
    forest = case.initial_forest()
    forest.refine_uniform(levels)
    space = P1Space(forest)
    V = space.interpolate(lambda x: 1.0 + x[:, 0] ** 2 + x[:, 1] ** 2)
    V[space.boundary_dofs] = 0.0
    grad_v = space.element_gradients(V)
    corners = space.corners
    nodal = V[space.elements]

    def terms(x: np.ndarray, elements: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lam = barycentric(corners[elements], x[:, None, :])[:, 0]
        v = np.sum(lam * nodal[elements], axis=1)
        flux = np.einsum("nij,nj->ni", case.oracle.eval_A(x), case.exact.gradient(x))
        return np.sum(flux * grad_v[elements], axis=1), source_scale * case.oracle.eval_f(x) * v

    def signed(x, elements):
        stiffness, load = terms(x, elements)
        return stiffness - load

    def absolute(x, elements):
        stiffness, load = terms(x, elements)
        return np.abs(stiffness) + np.abs(load)

    hints = (case.exact.singular_points, case.exact.interface)
    total = integrate_piecewise(signed, corners, *hints).sum()
    scale = integrate_piecewise(absolute, corners, *hints).sum()
    return abs(total) / scale


@pytest.mark.parametrize("factory", [lshaped_case, kellogg_case, smooth_case])
@pytest.mark.parametrize("levels", [4, 6])
def test_exact_solution_satisfies_weak_form(factory, levels):
    assert weak_form_residual(factory(), levels) <= 1e-2


def test_weak_form_residual_detects_wrong_source():
    assert weak_form_residual(smooth_case(), 4, source_scale=2.0) > 5e-2


# ===========================================
# Registry
# ===========================================

def test_registry_builds_every_case():
    assert case_names() == ["lshaped", "kellogg", "smooth"]
    for name in case_names():
        case = get_case(name)
        assert case.name == name
        assert case.initial_forest().is_conforming()
        assert CASES[name].description


def test_registry_rejects_unknown_name():
    with pytest.raises(UnknownCaseError):
        get_case("circle")


@pytest.mark.parametrize("model", [TestCase, CaseEntry, CoefficientOracle, ExactSolution])
def test_models_use_dict_config(model):
    assert model.model_config["arbitrary_types_allowed"] is True
    assert "Config" not in vars(model)


# ===========================================
# EOC and grading
# ===========================================

def test_loglog_slope_examples():
    assert loglog_slope([100, 400], [1.0, 0.5]) == pytest.approx(-0.5)
    assert loglog_slope([10, 20, 40], [3.0, 3.0, 3.0]) == pytest.approx(0.0, abs=1e-12)


def test_eoc_of_power_law():
    dofs = 100.0 * 2.0 ** np.arange(10)
    report = eoc(dofs, dofs ** -0.48)
    assert report.asymptotic == pytest.approx(-0.48)
    assert report.preasymptotic == pytest.approx(-0.48)
    assert report.format().startswith("asymptotic_eoc -0.480000\n")


def test_eoc_short_series():
    report = eoc([10, 20, 40], [1.0, 0.7, 0.5])
    assert report.preasymptotic is None
    assert "preasymptotic_eoc nan" in report.format()
    with pytest.raises(DiscError):
        eoc([10, 20], [1.0, 0.5])
    with pytest.raises(DiscError):
        loglog_slope([10, 20], [1.0, 0.0])


def test_window_slopes():
    dofs = 10.0 * 2.0 ** np.arange(8)
    slopes = window_slopes(dofs, dofs ** -0.5, window=3)
    assert len(slopes) == 6
    np.testing.assert_allclose(slopes, -0.5)


def test_annulus_grading(centered_forest):
    centered_forest.refine_uniform(6)
    stats = annulus_grading(centered_forest, (0.0, 0.0), 3)
    assert [s.level for s in stats] == [0, 1, 2]
    assert all(not s.empty for s in stats)
    # Uniform refinement: the same diameter everywhere
    assert stats[0].max_diameter == pytest.approx(stats[2].min_diameter)

    far = annulus_grading(centered_forest, (10.0, 10.0), 2)
    assert all(s.empty and s.max_diameter is None for s in far)
    with pytest.raises(MeshError):
        annulus_grading(centered_forest, (0.0, 0.0), 0)


# ===========================================
# Experiment runner
# ===========================================

def test_smooth_experiment_writes_artifacts(tmp_path):
    out = tmp_path / "smooth"
    assert run_experiment(["--test", "smooth", "--max-dofs", "300", "--out", str(out)]) == 0
    for name in ("trace.csv", "trace_full.csv", "eoc.txt", "mesh_final.txt", "solution.txt",
                 "estimator.txt", "coefficient.txt", "source.txt"):
        assert (out / name).exists(), name

    trace = pd.read_csv(out / "trace.csv")
    assert trace["dofs_pde"].iloc[-1] >= 300
    assert trace["energy_error"].notna().all()
    assert "stop_reason max_dofs" in (out / "eoc.txt").read_text()


def test_experiment_is_deterministic(tmp_path):
    args = ["--test", "smooth", "--max-dofs", "150"]
    assert run_experiment(args + ["--out", str(tmp_path / "a")]) == 0
    assert run_experiment(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()
    assert (tmp_path / "a" / "solution.txt").read_bytes() == (tmp_path / "b" / "solution.txt").read_bytes()


@pytest.mark.parametrize("argv, code", [
    (["--test", "circle"], 3),
    (["--test", "smooth", "--degree-A", "2"], 4),
    (["--test", "smooth", "--theta", "1.5"], 4),
    (["--test", "smooth", "--q", "1.5"], 4),
    (["--q", "2"], 2),
])
def test_experiment_exit_codes(tmp_path, argv, code):
    assert run_experiment(argv + ["--out", str(tmp_path)]) == code


def test_q_flag_accepts_any_exponent_from_two():
    parser = build_parser()
    assert ">= 2 or inf" in " ".join(parser.format_help().split())
    assert make_config(parser.parse_args(["--test", "smooth", "--q", "2.5"])).q == 2.5
    assert math.isinf(make_config(parser.parse_args(["--test", "smooth", "--q", "inf"])).q)


def test_linf_coefficient_error_cannot_resolve_the_jump(tmp_path):
    code = run_experiment(["--test", "lshaped", "--q", "inf", "--max-dofs", "300", "--out", str(tmp_path)])
    assert code == 5
    assert (tmp_path / "trace.csv").exists()
    assert "stop_reason error" in (tmp_path / "eoc.txt").read_text()


# ===========================================
# Desk-scale rates (--runslow)
# ===========================================

def run_trace(out, *args: str) -> pd.DataFrame:
    """Run the experiment into `out` and load its diagnostic trace."""
    assert run_experiment(list(args) + ["--out", str(out)]) == 0
    return pd.read_csv(out / "trace_full.csv")


@pytest.mark.slow
def test_smooth_rate(tmp_path):
    trace = run_trace(tmp_path, "--test", "smooth", "--max-dofs", "20000")
    report = eoc(trace["dofs_pde"], trace["energy_error"])
    assert report.asymptotic == pytest.approx(-0.5, abs=0.05)


@pytest.mark.slow
def test_lshaped_rate(tmp_path):
    trace = run_trace(tmp_path, "--test", "lshaped", "--max-dofs", "20000")
    report = eoc(trace["dofs_pde"], trace["energy_error"])
    assert -0.58 <= report.asymptotic <= -0.40

    efficiency = trace["energy_error"] / trace["eta"]
    assert efficiency.max() / efficiency.min() < 10.0
    assert (trace["galerkin_residual"] <= 10 * settings.cg_rel_tol).all()
    assert (trace["closure_overhead"] <= MAX_CLOSURE_OVERHEAD).all()


@pytest.mark.slow
def test_lshaped_rates_order_with_exponent(tmp_path):
    rates = {}
    for q in ("2", "3", "5", "6"):
        trace = run_trace(tmp_path / f"q{q}", "--test", "lshaped", "--q", q, "--max-dofs", "200000")
        rates[q] = eoc(trace["dofs_pde"], trace["energy_error"]).asymptotic

    assert rates["2"] < rates["3"] < rates["5"] < rates["6"]
    assert -0.47 <= rates["3"] <= -0.23
    assert -0.35 <= rates["5"] <= -0.13
    assert -0.30 <= rates["6"] <= -0.10

    # Finite q keeps converging where the sup-norm error stalls at the jump
    out = tmp_path / "inf"
    assert run_experiment(["--test", "lshaped", "--q", "inf", "--max-dofs", "200000", "--out", str(out)]) == 5


@pytest.mark.slow
def test_kellogg_rate_improves_across_windows(tmp_path):
    trace = run_trace(tmp_path, "--test", "kellogg", "--max-dofs", "200000")
    report = eoc(trace["dofs_pde"], trace["energy_error"])
    assert report.asymptotic <= -0.15

    slopes = window_slopes(trace["dofs_pde"], trace["energy_error"], window=3)
    assert len(slopes) >= 3
    last = slopes[-3:]
    assert np.all(np.diff(last) <= 0.02)
    assert last[-1] <= last[0]
