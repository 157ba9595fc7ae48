# freeconv/suites.py

"""
Validation suites run by the ``validate`` and ``rmt-check`` commands.

Every suite returns CheckResult rows (measured error vs tolerance). Suites
run one after another; an engine error inside one suite is logged and
recorded as a failed row so the remaining suites still run.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from freeconv import config
from freeconv.closed_forms import closed_form_density, semicircle_family
from freeconv.density import density_grid
from freeconv.diagnostics import (
    density_comparability,
    edge_certificate,
    exterior_monotonicity,
    interior_margin,
    interior_mask,
    subordination_report,
    ratio_limit_check,
    sqrt_fit,
)
from freeconv.errors import FreeConvError
from freeconv.measure import JacobiMeasure, make_arcsine, make_jacobi, make_marchenko_pastur, make_semicircle, variance
from freeconv.oracles import EmpiricalSpectrum, distance_ks, rmt_sample
from freeconv.schemas import CheckResult
from freeconv.subordination import nu_mass
from freeconv.support import exterior_scan, find_support

logger = logging.getLogger(__name__)

SEMICIRCLE_PAIRS = [(1.0, 1.0), (1.0, 4.0), (0.5, 0.5)]

MIXED_PAIRS = [
    ("semicircle:1+arcsine:2", lambda: (make_semicircle(1.0), make_arcsine(2.0))),
    ("mp:0.25+semicircle:1", lambda: (make_marchenko_pastur(0.25), make_semicircle(1.0))),
]

RANDOM_PAIRS = 5
REPORT_GRID = (20, 20)
SUBORDINATION_TOL = 1e-12
EXPONENTS = (-0.5, 0.0, 0.5)


# ── Result container ─────────────────────────────────────────────────────────


@dataclass
class SuiteReport:
    rows: List[CheckResult] = field(default_factory=list)
    errors: List[FreeConvError] = field(default_factory=list)
    spectrum: Optional[EmpiricalSpectrum] = None

    @property
    def passed(self) -> bool:
        return not self.errors and all(r.passed for r in self.rows)

    @property
    def exit_code(self) -> int:
        if self.errors:
            return max(e.exit_code for e in self.errors)
        return 0 if self.passed else 1


def _row(suite: str, check: str, measured: float, tolerance: float, detail: Optional[str] = None) -> CheckResult:
    measured = float(measured)
    passed = math.isfinite(measured) and measured <= tolerance
    if not passed:
        logger.warning(f"[{suite}] {check}: measured {measured:.3e} exceeds tolerance {tolerance:.1e}")
    return CheckResult(suite=suite, check=check, measured=measured, tolerance=tolerance, passed=passed, detail=detail)


def _lower_bound_row(suite: str, check: str, measured: float, bound: float, strict: bool = True, detail: Optional[str] = None) -> CheckResult:
    """Row that passes when measured > bound (or >= bound when not strict)."""
    measured = float(measured)
    passed = math.isfinite(measured) and (measured > bound if strict else measured >= bound)
    if not passed:
        relation = ">" if strict else ">="
        logger.warning(f"[{suite}] {check}: measured {measured:.3e} is not {relation} {bound:.1e}")
    return CheckResult(suite=suite, check=check, measured=measured, tolerance=bound, passed=passed, detail=detail)


# ════════════════════════════════════════════════════════════════════════════
#  Suites
# ════════════════════════════════════════════════════════════════════════════


def _conservation_rows(suite, mu_a, mu_b, grid) -> List[CheckResult]:
    var_sum = variance(mu_a) + variance(mu_b)
    return [
        _row(suite, "mass", abs(grid.mass - 1.0), 1e-6),
        _row(suite, "mean", abs(grid.mean), 1e-8),
        _row(suite, "variance", abs(grid.variance - var_sum) / var_sum, 1e-5, f"expected {var_sum:.12g}"),
        _row(suite, "cdf_endpoint", abs(grid.cdf[-1] - 1.0), 1e-6),
    ]


def _subordination_rows(suite, mu_a, mu_b) -> List[CheckResult]:
    nx, ny = REPORT_GRID
    rep = subordination_report(mu_a, mu_b, nx=nx, ny=ny, tol=SUBORDINATION_TOL)
    grid_detail = f"{rep['points']} points"
    return [
        _lower_bound_row(suite, "imag_gain", rep["min_imag_gain"], 0.0, strict=False, detail=grid_detail),
        _row(suite, "edge_product", max(rep["max_edge_product"] - 1.0, 0.0), 1e-10, f"max product {rep['max_edge_product']:.12g}"),
        _row(suite, "subordination_residual", rep["max_residual"], SUBORDINATION_TOL, grid_detail),
        _lower_bound_row(suite, "support_gap", rep["gap"], 0.0, detail=f"comparability {rep['comparability']:.6g}"),
    ]


def semicircle_suite(t: float, s: float, grid_n: Optional[int] = None) -> List[CheckResult]:
    """σ_t ⊞ σ_s against the closed form of σ_{t+s}."""
    suite = f"semicircle:{t:g}+semicircle:{s:g}"
    mu_a, mu_b = make_semicircle(t), make_semicircle(s)
    support = find_support(mu_a, mu_b)
    radius = 2.0 * math.sqrt(t + s)
    grid = density_grid(mu_a, mu_b, support, n=grid_n)

    mask = interior_mask(grid)
    exact = closed_form_density(semicircle_family(t + s), grid.xs[mask])
    rows = [
        _row(suite, "E_minus", abs(support.e_minus + radius), 1e-8),
        _row(suite, "E_plus", abs(support.e_plus - radius), 1e-8),
        _row(suite, "density_sup", float(np.max(np.abs(grid.rho[mask] - exact))), 1e-6),
        _row(suite, "edge_certificate", edge_certificate(mu_a, mu_b, support)["max_certificate"], 1e-8),
    ]
    rows += _conservation_rows(suite, mu_a, mu_b, grid)
    for side in ("minus", "plus"):
        fit = sqrt_fit(mu_a, mu_b, support, side=side)
        rows.append(_row(suite, f"sqrt_slope_{side}", abs(fit["slope"] - 0.5), 0.02))
        rows.append(_row(suite, f"sqrt_prefactor_{side}", fit["relative_error"], 0.02))
    return rows


def mixed_suite(label: str, mu_a: JacobiMeasure, mu_b: JacobiMeasure, grid_n: Optional[int] = None) -> List[CheckResult]:
    """Conservation laws and edge invariants for a pair without closed form."""
    support = find_support(mu_a, mu_b)
    grid = density_grid(mu_a, mu_b, support, n=grid_n)
    rows = [_row(label, "edge_certificate", edge_certificate(mu_a, mu_b, support)["max_certificate"], 1e-8)]
    rows += _conservation_rows(label, mu_a, mu_b, grid)

    nu_a, nu_b = nu_mass(mu_a, mu_b, eta=1e3)
    rows.append(_row(label, "nu_mass_alpha", abs(nu_a / variance(mu_a) - 1.0), 0.01))
    rows.append(_row(label, "nu_mass_beta", abs(nu_b / variance(mu_b) - 1.0), 0.01))
    rows.append(_row(label, "ratio_limit", ratio_limit_check(mu_a, mu_b, support), 1e-4))
    delta = interior_margin(mu_a, mu_b, support)
    rows.append(_lower_bound_row(label, "interior_margin", delta, 0.0))
    rows += _subordination_rows(label, mu_a, mu_b)

    comp = density_comparability(grid)
    rows.append(_row(label, "density_comparability", comp["C"], 1e6))

    mono = exterior_monotonicity(mu_a, mu_b, support)
    rows.append(_row(label, "exterior_monotonicity", float(sum(not v for v in mono.values())), 0.0))
    for side in ("minus", "plus"):
        fit = sqrt_fit(mu_a, mu_b, support, side=side)
        rows.append(_row(label, f"sqrt_slope_{side}", abs(fit["slope"] - 0.5), 0.02))
        rows.append(_row(label, f"sqrt_prefactor_{side}", fit["relative_error"], 0.02))
    return rows


def random_jacobi_pairs(count: int = RANDOM_PAIRS, seed: Optional[int] = None) -> List[Tuple[str, JacobiMeasure, JacobiMeasure]]:
    """Reproducible Jacobi pairs with exponents drawn from EXPONENTS."""
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    pairs = []
    for k in range(count):
        measures = []
        for _ in range(2):
            width = rng.uniform(1.0, 4.0)
            lower = -rng.uniform(0.2, 0.8) * width
            t_minus, t_plus = rng.choice(EXPONENTS, size=2)
            tilt = rng.uniform(-0.3, 0.3)
            measures.append(make_jacobi(lower, lower + width, t_minus, t_plus, (1.0, tilt)))
        pairs.append((f"jacobi-pair-{k}", measures[0], measures[1]))
    return pairs


def random_pair_suite(label: str, mu_a: JacobiMeasure, mu_b: JacobiMeasure, grid_n: Optional[int] = None) -> List[CheckResult]:
    """Edge certificate, single-interval scan and positivity for one random pair."""
    support = find_support(mu_a, mu_b)
    grid = density_grid(mu_a, mu_b, support, n=grid_n)
    left, right = exterior_scan(mu_a, mu_b)
    rows = [
        _row(label, "edge_certificate", edge_certificate(mu_a, mu_b, support)["max_certificate"], 1e-8),
        _row(label, "exterior_crossings", abs(left - 1) + abs(right - 1), 0.0, f"crossings ({left}, {right})"),
        _row(label, "nonpositive_interior", float(np.count_nonzero(grid.rho[1:-1] <= 0.0)), 0.0),
    ]
    rows += _conservation_rows(label, mu_a, mu_b, grid)
    rows += _subordination_rows(label, mu_a, mu_b)
    return rows


# ════════════════════════════════════════════════════════════════════════════
#  Drivers
# ════════════════════════════════════════════════════════════════════════════


def _run(report: SuiteReport, label: str, job: Callable[[], List[CheckResult]]) -> None:
    logger.info(f"Running suite {label}...")
    try:
        rows = job()
        report.rows.extend(rows)
        logger.info(f"Finished suite {label}: {sum(r.passed for r in rows)}/{len(rows)} checks passed.")
    except FreeConvError as e:
        logger.error(f"Error in suite {label}: {e}")
        report.errors.append(e)
        report.rows.append(CheckResult(suite=label, check="run", measured=math.nan, tolerance=0.0, passed=False, detail=str(e)))


def run_validation(grid_n: Optional[int] = None, seed: Optional[int] = None) -> SuiteReport:
    """Closed-form closure, conservation and edge suites."""
    report = SuiteReport()
    for t, s in SEMICIRCLE_PAIRS:
        _run(report, f"semicircle:{t:g}+semicircle:{s:g}", lambda t=t, s=s: semicircle_suite(t, s, grid_n))
    for label, build in MIXED_PAIRS:
        _run(report, label, lambda label=label, build=build: mixed_suite(label, *build(), grid_n=grid_n))
    for label, mu_a, mu_b in random_jacobi_pairs(seed=seed):
        _run(report, label, lambda label=label, a=mu_a, b=mu_b: random_pair_suite(label, a, b, grid_n))
    logger.info(f"validation finished: {sum(r.passed for r in report.rows)}/{len(report.rows)} checks passed")
    return report


def run_rmt_check(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    n_matrix: int = 500,
    n_samples: int = 50,
    seed: Optional[int] = None,
    grid_n: Optional[int] = None,
    threads: Optional[int] = None,
    tolerance: Optional[float] = None,
    tol: Optional[float] = None,
) -> SuiteReport:
    """KS distance between A + UBU* spectra and the engine CDF."""
    if tolerance is None:
        tolerance = 0.02 if mu_a == mu_b else 0.03
    report = SuiteReport()

    def job() -> List[CheckResult]:
        support = find_support(mu_a, mu_b, tol_e=tol)
        grid = density_grid(mu_a, mu_b, support, n=grid_n, tol=tol, threads=threads)
        spectrum = rmt_sample(mu_a, mu_b, n_matrix, n_samples, seed=seed, threads=threads)
        report.spectrum = spectrum
        ks = distance_ks(spectrum, grid)
        var_sum = variance(mu_a) + variance(mu_b)
        detail = f"n_matrix={n_matrix}, n_samples={n_samples}, seed={spectrum.seed}"
        logger.info(f"KS distance {ks:.6f} ({detail})")
        return [
            _row("rmt", "ks_distance", ks, tolerance, detail),
            _row("rmt", "spectrum_variance", abs(spectrum.variance - var_sum) / var_sum, 0.05),
        ]

    _run(report, "rmt", job)
    return report
