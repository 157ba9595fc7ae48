"""
Aggregated invariant reports for a measure pair.

Each function solves what it needs and returns a flat dict of measured
quantities (constants, margins, worst-case residuals) so the validation
suite can compare them with tolerances and the CLI can print them.
"""

import logging
import math
from typing import Dict, List, Optional

import numpy as np

from freeconv import config
from freeconv.density import DensityGrid
from freeconv.measure import JacobiMeasure, f_derivatives, i_hat
from freeconv.subordination import domain, imag_ratio_limit, solve_grid, solve_point, solve_real_outside
from freeconv.support import SupportResult, edge_derivative, edge_function, predicted_edge_slope

logger = logging.getLogger(__name__)


def _support_distance(mu: JacobiMeasure, w: complex) -> float:
    dx = max(mu.lower - w.real, 0.0, w.real - mu.upper)
    return math.hypot(dx, w.imag)


def _interior_energies(support: SupportResult, n: int) -> np.ndarray:
    return np.linspace(support.e_minus, support.e_plus, n + 2)[1:-1]


def subordination_report(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    nx: int = 20,
    ny: int = 20,
    tol: Optional[float] = None,
    threads: Optional[int] = None,
) -> Dict:
    """Solve an nx × ny grid over the domain rectangle and collect the subordination invariants."""
    dom = domain(mu_a, mu_b)
    xs = np.linspace(dom.e_lo, dom.e_hi, nx)
    etas = dom.eta_max * np.arange(1, ny + 1) / ny
    grid = [complex(x, eta) for x in xs for eta in etas]
    points = solve_grid(mu_a, mu_b, grid, tol=tol, threads=threads)

    gains, products, residuals, gaps, ratios = [], [], [], [], []
    for p in points:
        gains.append(min(p.omega_alpha.imag, p.omega_beta.imag) - p.z.imag)
        products.append(i_hat(mu_a, p.omega_beta) * i_hat(mu_b, p.omega_alpha))
        residuals.append(p.residual)
        gaps.append(min(_support_distance(mu_a, p.omega_beta), _support_distance(mu_b, p.omega_alpha)))
        im_m = p.m_value.imag
        for w in (p.omega_alpha, p.omega_beta):
            ratios.append(w.imag / im_m)

    report = {
        "points": len(points),
        "min_imag_gain": float(min(gains)),
        "max_edge_product": float(max(products)),
        "max_residual": float(max(residuals)),
        "gap": float(min(gaps)),
        "comparability": float(max(max(ratios), 1.0 / min(ratios))),
    }
    logger.info(f"subordination report: {report}")
    return report


def edge_certificate(mu_a: JacobiMeasure, mu_b: JacobiMeasure, support: SupportResult) -> Dict:
    """(F′_α(ω_β) − 1)(F′_β(ω_α) − 1) − 1 and z̃′ at both edges."""
    out: Dict[str, float] = {}
    for label, point in zip(("minus", "plus"), support.points):
        _, f1_a, _ = f_derivatives(mu_a, point.omega_beta)
        _, f1_b, _ = f_derivatives(mu_b, point.omega_alpha)
        out[f"certificate_{label}"] = float(abs(((f1_a - 1.0) * (f1_b - 1.0)).real - 1.0))
        out[f"ztilde_prime_{label}"] = edge_derivative(mu_a, mu_b, point)
    out["max_certificate"] = max(out["certificate_minus"], out["certificate_plus"])
    return out


def interior_margin(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    support: SupportResult,
    n: int = 100,
    eta: float = 1e-8,
) -> float:
    """δ = 1 − max Î_α·Î_β over n interior energies at height η."""
    worst, init = -math.inf, None
    for E in _interior_energies(support, n):
        p = solve_point(mu_a, mu_b, complex(E, eta), init=init)
        init = p.omega_beta
        worst = max(worst, i_hat(mu_a, p.omega_beta) * i_hat(mu_b, p.omega_alpha))
    return 1.0 - worst


def exterior_monotonicity(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, support: SupportResult, n: int = 50
) -> Dict:
    """Check f rises toward the support and ω_α, ω_β increase with E on both exterior ladders."""
    dom = domain(mu_a, mu_b)
    pad = 1e-6 * support.width
    ladders = {
        "minus": np.linspace(dom.e_lo, support.e_minus - pad, n),
        "plus": np.linspace(support.e_plus + pad, dom.e_hi, n),
    }
    out: Dict[str, bool] = {}
    for label, energies in ladders.items():
        fs: List[float] = []
        wa: List[float] = []
        wb: List[float] = []
        init = None
        for E in energies:
            p = solve_real_outside(mu_a, mu_b, E, init=init)
            init = p.omega_beta.real
            fs.append(edge_function(mu_a, mu_b, E, init=init))
            wa.append(p.omega_alpha.real)
            wb.append(p.omega_beta.real)
        df = np.diff(fs)
        out[f"f_monotone_{label}"] = bool(np.all(df > 0) if label == "minus" else np.all(df < 0))
        out[f"omega_increasing_{label}"] = bool(np.all(np.diff(wa) > 0) and np.all(np.diff(wb) > 0))
    return out


def sqrt_fit(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    support: SupportResult,
    side: str = "minus",
    s_min: float = 1e-6,
    s_max: float = 1e-3,
    n: int = 16,
    eta: Optional[float] = None,
) -> Dict:
    """Log-log slope and prefactor of ρ at distance s ∈ [s_min, s_max] inside an edge."""
    eta = config.ETA_MIN if eta is None else eta
    idx = 0 if side == "minus" else 1
    edge = support.e_minus if idx == 0 else support.e_plus
    sign = 1.0 if idx == 0 else -1.0

    s = np.geomspace(s_max, s_min, n)
    rho, init = [], None
    for si in s:
        p = solve_point(mu_a, mu_b, complex(edge + sign * si, eta), init=init)
        init = p.omega_beta
        rho.append(p.m_value.imag / math.pi)
    rho = np.asarray(rho)

    slope, _ = np.polyfit(np.log(s), np.log(rho), 1)
    prefactor = float(np.exp(np.mean(np.log(rho) - 0.5 * np.log(s))))
    predicted = predicted_edge_slope(mu_a, mu_b, support)[idx]
    return {
        "side": side,
        "slope": float(slope),
        "prefactor": prefactor,
        "predicted": float(predicted),
        "relative_error": abs(prefactor - predicted) / predicted,
    }


def edge_expansion_constant(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    support: SupportResult,
    side: str = "minus",
    s_min: float = 1e-6,
    s_max: float = 1e-3,
    n: int = 16,
) -> float:
    """K = max |ω_β(E ∓ s) − ω_β(E) ± γ√s| / s over the real exterior side of an edge."""
    idx = 0 if side == "minus" else 1
    edge = support.e_minus if idx == 0 else support.e_plus
    sign = -1.0 if idx == 0 else 1.0
    omega_edge = support.omega_beta_at[idx]
    gamma = support.gamma_beta[idx]

    worst, init = 0.0, None
    for s in np.geomspace(s_max, s_min, n):
        p = solve_real_outside(mu_a, mu_b, edge + sign * s, init=init)
        init = p.omega_beta.real
        deviation = p.omega_beta.real - omega_edge - sign * gamma * math.sqrt(s)
        worst = max(worst, abs(deviation) / s)
    return worst


def density_comparability(grid: DensityGrid) -> Dict:
    """Bounds of ρ(x) / (√(x − E_−)·√(E_+ − x)) over the interior grid points."""
    x = grid.xs[1:-1]
    envelope = np.sqrt(x - grid.e_minus) * np.sqrt(grid.e_plus - x)
    ratio = grid.rho[1:-1] / envelope
    lo, hi = float(ratio.min()), float(ratio.max())
    return {"min_ratio": lo, "max_ratio": hi, "C": max(hi, 1.0 / lo) if lo > 0 else math.inf}


def ratio_limit_check(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    support: SupportResult,
    n: int = 20,
    eta: float = 1e-8,
) -> float:
    """Max |Im ω_α/Im ω_β − I_α(ω_β)/I_β(ω_α)| over n interior energies."""
    worst, init = 0.0, None
    for E in _interior_energies(support, n):
        p = solve_point(mu_a, mu_b, complex(E, eta), init=init)
        init = p.omega_beta
        measured = p.omega_alpha.imag / p.omega_beta.imag
        worst = max(worst, abs(measured - imag_ratio_limit(mu_a, mu_b, E, p)))
    return worst


def interior_mask(grid: DensityGrid, distance: float = 1e-2) -> np.ndarray:
    """Mask of grid points at least *distance* from both edges."""
    return (grid.xs - grid.e_minus >= distance) & (grid.e_plus - grid.xs >= distance)
