# freeconv/main.py

"""
Command-line entry point: ``python -m freeconv <command> [options]``.

Commands:
    - support     : support endpoints and edge coefficients as JSON
    - density     : density CSV (x,rho,cdf) plus a JSON metadata sidecar
    - subordinate : one subordination point as JSON (``--z re,im``)
    - validate    : closed-form and invariant suites, pass/fail table
    - rmt-check   : KS distance between random-matrix spectra and the engine
    - measure     : normalized measure JSON (round-trips through --a)

Exit codes: 0 success, 1 tolerance failure, 2 bad input, 3 solver failure.
Logs go to stderr; stdout carries only machine-readable output.
"""

import argparse
import logging
import sys
from typing import List, Optional, Tuple

from pydantic import ValidationError

from freeconv import config
from freeconv.density import density_grid
from freeconv.errors import FreeConvError, SpecError, ToleranceFailure
from freeconv.export import format_results, results_frame, write_density, write_json, write_spectrum
from freeconv.measure import JacobiMeasure, from_spec, to_spec
from freeconv.schemas import RunConfig, parse_measure_spec
from freeconv.subordination import point_to_record, solve_point, solve_real_outside
from freeconv.suites import SuiteReport, run_rmt_check, run_validation
from freeconv.support import find_support, support_to_record

logger = logging.getLogger(__name__)

COMMANDS = ("support", "density", "subordinate", "validate", "rmt-check", "measure")
DEFAULT_RMT_MEASURE = "semicircle:1"


# ── Argument parsing ─────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freeconv",
        description="Free additive convolution of Jacobi-type measures.",
    )
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="root log level (default: %(default)s)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", "--measure-a", dest="measure_a", help="measure spec: JSON, JSON file or shorthand")
    common.add_argument("--b", "--measure-b", dest="measure_b", help="second measure spec")
    common.add_argument("--tol", type=float, help="subordination and edge-search tolerance")
    common.add_argument("--eta-min", dest="eta_min", type=float, help="Stieltjes inversion offset")
    common.add_argument("--grid-n", dest="grid_n", type=int, help="density grid size")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--n-matrix", dest="n_matrix", type=int, help="matrix size for rmt-check")
    common.add_argument("--n-samples", dest="n_samples", type=int, help="number of samples for rmt-check")
    common.add_argument("--z", help="spectral parameter 're,im' (use --z=-1,0.5 for negative values)")
    common.add_argument("--threads", type=int, help="worker cap (default FREECONV_THREADS)")
    common.add_argument("--json", dest="as_json", action="store_true", help="emit check results as JSON")
    common.add_argument("--richardson", action="store_true", help="extrapolate the density to eta = 0")

    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k != "log_level" and v is not None}
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise SpecError(f"invalid options: {e.errors(include_url=False)}") from e


def _load(text: Optional[str], role: str) -> JacobiMeasure:
    if not text:
        raise SpecError(f"measure {role} is required (--{role})")
    return from_spec(parse_measure_spec(text))


def _load_pair(cfg: RunConfig) -> Tuple[JacobiMeasure, JacobiMeasure]:
    return _load(cfg.measure_a, "a"), _load(cfg.measure_b, "b")


# ── Commands ─────────────────────────────────────────────────────────────────


def _emit_report(cfg: RunConfig, report: SuiteReport) -> int:
    if cfg.as_json:
        payload = results_frame(report.rows).to_dict(orient="records")
        write_json({"passed": report.passed, "checks": payload}, cfg.out, sys.stdout)
    else:
        table = format_results(report.rows)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as f:
                f.write(table + "\n")
        else:
            print(table)
    if report.errors:
        return report.exit_code
    failed = [f"{r.suite}/{r.check}" for r in report.rows if not r.passed]
    if failed:
        raise ToleranceFailure(f"{len(failed)} check(s) outside tolerance: {', '.join(failed)}")
    return 0


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    logger.info(f"Running {cfg.command}...")

    if cfg.command == "measure":
        spec = to_spec(_load(cfg.measure_a, "a"))
        write_json(spec, cfg.out, sys.stdout)
        return 0

    if cfg.command == "support":
        mu_a, mu_b = _load_pair(cfg)
        support = find_support(mu_a, mu_b, tol_e=cfg.tol)
        write_json(support_to_record(support), cfg.out, sys.stdout)
        return 0

    if cfg.command == "density":
        mu_a, mu_b = _load_pair(cfg)
        support = find_support(mu_a, mu_b, tol_e=cfg.tol)
        grid = density_grid(
            mu_a, mu_b, support,
            n=cfg.grid_n, eta=cfg.eta_min, tol=cfg.tol, threads=cfg.threads, richardson=cfg.richardson,
        )
        write_density(grid, cfg.out, sys.stdout)
        return 0

    if cfg.command == "subordinate":
        if cfg.z is None:
            raise SpecError("subordinate needs --z re,im")
        mu_a, mu_b = _load_pair(cfg)
        re, im = cfg.z
        if im == 0.0:
            point = solve_real_outside(mu_a, mu_b, re, tol=cfg.tol)
        else:
            point = solve_point(mu_a, mu_b, complex(re, im), tol=cfg.tol)
        write_json(point_to_record(point), cfg.out, sys.stdout)
        return 0

    if cfg.command == "validate":
        return _emit_report(cfg, run_validation(grid_n=cfg.grid_n, seed=cfg.seed))

    if cfg.command == "rmt-check":
        mu_a = _load(cfg.measure_a or DEFAULT_RMT_MEASURE, "a")
        mu_b = _load(cfg.measure_b or DEFAULT_RMT_MEASURE, "b")
        report = run_rmt_check(
            mu_a, mu_b,
            n_matrix=cfg.n_matrix, n_samples=cfg.n_samples, seed=cfg.seed,
            grid_n=cfg.grid_n, threads=cfg.threads, tol=cfg.tol,
        )
        if report.spectrum is not None and cfg.out:
            write_spectrum(report.spectrum, cfg.out)
            cfg = cfg.model_copy(update={"out": None})
        return _emit_report(cfg, report)

    raise SpecError(f"unknown command {cfg.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return run(config_from_args(args))
    except FreeConvError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
