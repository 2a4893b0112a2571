"""
Experiment runner: build a benchmark, run DISC, write the artifacts.

Exit codes:
    0  success
    2  argument syntax (argparse)
    3  unknown test name
    4  invalid parameter range
    5  numerical non-convergence (GREEDY cap, CG, PDE caps)
    1  anything else
"""
import argparse
from pathlib import Path
from typing import Optional, Sequence

import structlog
from pydantic import ValidationError

from config.settings import settings
from src.afem.config import PdeConfig
from src.bench.eoc import EocReport, eoc
from src.bench.registry import case_names, get_case
from src.core.errors import (
    ApproximationError,
    ConvergenceError,
    DiscError,
    DiscIterationError,
    GreedyNonConvergenceError,
    PdeError,
    UnknownCaseError,
)
from src.core.logging import configure_logging
from src.disc.config import DiscConfig
from src.disc.driver import disc
from src.disc.trace import DiscTrace
from src.fem.io import write_estimator, write_field, write_solution
from src.mesh.io import write_mesh

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN_CASE = 3
EXIT_INVALID_PARAMETER = 4
EXIT_NONCONVERGENCE = 5


def exponent(value: str) -> float:
    """Parse q; accepts 'inf'."""
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Run DISC on a benchmark problem")
    parser.add_argument("--test", required=True, help=f"benchmark name ({', '.join(case_names())})")
    parser.add_argument("--q", type=exponent, default=2.0, help="Lq exponent of the coefficient error, any value >= 2 or inf")
    parser.add_argument("--theta", type=float, default=0.3, help="Doerfler parameter")
    parser.add_argument("--beta", type=float, default=0.7, help="tolerance decay factor")
    parser.add_argument("--omega", type=float, default=0.8, help="data tolerance fraction")
    parser.add_argument("--eps0", type=float, default=2.0, help="initial tolerance")
    parser.add_argument("--max-dofs", type=int, default=200_000, help="stop once the solve exceeds this many dofs")
    parser.add_argument("--max-outer", type=int, default=40, help="outer iteration cap")
    parser.add_argument("--max-inner", type=int, default=200, help="inner AFEM iteration cap")
    parser.add_argument("--degree-A", type=int, default=0, help="polynomial degree of the coefficient approximation")
    parser.add_argument("--out", type=Path, default=Path(settings.output_dir), help="output directory")
    parser.add_argument("--record-timing", action="store_true", default=settings.record_timing,
                        help="write wall times into the trace (breaks byte-identical reruns)")
    return parser


def make_config(args: argparse.Namespace) -> DiscConfig:
    """DiscConfig from parsed flags; raises pydantic.ValidationError on bad ranges."""
    return DiscConfig(
        eps0=args.eps0,
        omega=args.omega,
        beta=args.beta,
        q=args.q,
        degree_A=args.degree_A,
        pde=PdeConfig(theta=args.theta, max_inner_iterations=args.max_inner, max_dofs=args.max_dofs),
        max_outer_iterations=args.max_outer,
        max_dofs=args.max_dofs,
        record_timing=args.record_timing,
    )


def exit_code_for(error: Exception) -> int:
    if isinstance(error, DiscIterationError):
        error = error.cause
    if isinstance(error, UnknownCaseError):
        return EXIT_UNKNOWN_CASE
    if isinstance(error, ValidationError):
        return EXIT_INVALID_PARAMETER
    if isinstance(error, (GreedyNonConvergenceError, ConvergenceError, PdeError)):
        return EXIT_NONCONVERGENCE
    if isinstance(error, ApproximationError):
        return EXIT_INVALID_PARAMETER
    return EXIT_ERROR


def write_artifacts(trace: DiscTrace, out: Path, forest=None) -> Optional[EocReport]:
    """trace.csv, trace_full.csv, eoc.txt and, when a solve finished, the final discrete state."""
    out.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out / "trace.csv")
    trace.write_csv(out / "trace_full.csv", diagnostics=True)

    dofs, errors = trace.points("energy_error")
    if len(dofs) < 3:
        dofs, errors = trace.points("eta")
    report = eoc(dofs, errors) if len(dofs) >= 3 else None
    text = report.format() if report else "asymptotic_eoc nan\npreasymptotic_eoc nan\npoints 0\n"
    (out / "eoc.txt").write_text(text + f"stop_reason {trace.stop_reason}\n")

    if forest is not None and "U" in trace.final:
        write_mesh(out / "mesh_final.txt", forest)
        write_solution(out / "solution.txt", trace.final["U"])
        write_estimator(out / "estimator.txt", trace.final["report"])
        write_field(out / "coefficient.txt", trace.final["A_hat"])
        write_field(out / "source.txt", trace.final["f_hat"])
    return report


def run_experiment(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI entry point.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(settings.log_format, settings.log_colors, settings.log_level)
    log = logger.bind(test=args.test, q=args.q)

    try:
        case = get_case(args.test)
        config = make_config(args)
    except (UnknownCaseError, ValidationError) as e:
        log.error("Invalid experiment", error=str(e))
        return exit_code_for(e)

    forest = case.initial_forest()
    try:
        trace = disc(forest, case.oracle, config, exact=case.exact, boundary=case.boundary)
    except DiscIterationError as e:
        if isinstance(e.cause, GreedyNonConvergenceError):
            log.error(
                "Data approximation cannot reach the tolerance",
                iteration=e.iteration,
                tolerance=e.cause.tolerance,
                measured_floor=e.cause.floor,
            )
        else:
            log.error("DISC failed", iteration=e.iteration, error=e.cause.message, details=e.cause.details)
        if e.trace is not None:
            write_artifacts(e.trace, args.out)
        return exit_code_for(e)
    except DiscError as e:
        log.error("DISC failed", error=e.message)
        return exit_code_for(e)

    report = write_artifacts(trace, args.out, forest)
    log.info(
        "Experiment finished",
        iterations=len(trace),
        reason=trace.stop_reason,
        asymptotic_eoc=report.asymptotic if report else None,
        out=str(args.out),
    )
    return EXIT_OK
