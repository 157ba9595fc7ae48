"""
Support endpoints and square-root edge coefficients of μ_α ⊞ μ_β.

An endpoint E is a real point where the subordination functions are real,
separated from the supports, and satisfy the edge equation

    f(E) = Î_α(ω_β(E)) · Î_β(ω_α(E)) = (F′_α(ω_β) − 1)(F′_β(ω_α) − 1) = 1.

On each exterior ray f increases monotonically from 0 toward 1, so each side
has exactly one crossing. The crossing is located in the ω-parametrization:
for real w = ω_β outside supp μ_α,

    ω_α(w) = F_β⁻¹(F_α(w)),     E(w) = z̃(w) = ω_α(w) + w − F_α(w),

where the edge equation is smooth in w (it has a square-root shape in E).
The edge coefficients follow from the second derivative of z̃.

Public functions:
    - edge_function        : f(E) at a real E outside the support
    - find_support         : both endpoints with coefficients
    - ztilde_second        : z̃″ at a real edge point
    - edge_derivative      : z̃′ at a real point (zero at edges)
    - edge_coefficients    : γ^β_±, γ^α_± from z̃″
    - predicted_edge_slope : (γ^β/π)·I_α(ω_β) at both edges
    - exterior_scan        : number of crossings of the edge equation per side
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect, brentq, root_scalar

from freeconv import config
from freeconv.errors import (
    BracketFailure,
    EvaluationOnSupport,
    FreeConvError,
    LeftRealAxis,
    NonNegativeSecondDerivative,
    TooCloseToSupport,
)
from freeconv.measure import JacobiMeasure, f_derivatives, i_hat, i_integral, transform_pair
from freeconv.schemas import AlphaBeta, SupportRecord
from freeconv.subordination import SubordinationPoint, domain, solve_real_outside

logger = logging.getLogger(__name__)

_MARCH_STEPS = 64
SCAN_DEPTH = 1e-6


# ── Domain types ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SupportResult:
    e_minus: float
    e_plus: float
    omega_alpha_at: Tuple[float, float]
    omega_beta_at: Tuple[float, float]
    gamma_beta: Tuple[float, float] = (math.nan, math.nan)
    gamma_alpha: Tuple[float, float] = (math.nan, math.nan)
    edge_residuals: Tuple[float, float] = (math.nan, math.nan)
    points: Tuple[SubordinationPoint, ...] = ()

    @property
    def width(self) -> float:
        return self.e_plus - self.e_minus


# ════════════════════════════════════════════════════════════════════════════
#  Private helpers
# ════════════════════════════════════════════════════════════════════════════


def _real_f(mu: JacobiMeasure, w: float) -> Tuple[float, float]:
    """F_μ(w) and F′_μ(w) at a real point off the support."""
    m, f1, _ = transform_pair(mu, complex(w, 0.0))
    return -1.0 / m.real, f1.real


def _invert_f(mu: JacobiMeasure, target: float, left: bool) -> float:
    """
    Solve F_μ(v) = target for v in the exterior gap on the given side.

    F_μ is increasing on both exterior rays with F_μ(v) − v → 0 at infinity,
    so a bracket is found by stepping away from the support.
    """
    edge = mu.lower if left else mu.upper
    near = edge - 1e-9 * mu.half_width if left else edge + 1e-9 * mu.half_width
    f_near = _real_f(mu, near)[0]
    if (left and f_near <= target) or (not left and f_near >= target):
        raise LeftRealAxis(f"F target {target!r} is outside the range of F on the exterior gap")

    step = mu.half_width + 1.0
    far = min(target, edge) - step if left else max(target, edge) + step
    for _ in range(200):
        f_far = _real_f(mu, far)[0]
        if (left and f_far < target) or (not left and f_far > target):
            break
        step *= 2.0
        far = far - step if left else far + step
    else:
        raise BracketFailure(f"could not bracket F inverse at target {target!r}")

    lo, hi = (far, near) if left else (near, far)
    try:
        return float(brentq(lambda v: _real_f(mu, v)[0] - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    except ValueError as e:
        raise LeftRealAxis(f"F inverse at target {target!r} is not bracketed on the gap: {e}") from e


def _edge_state(mu_a: JacobiMeasure, mu_b: JacobiMeasure, w: float, left: bool):
    """(E, ω_α, f) for ω_β = w in the ω-parametrization."""
    f_a, f1_a = _real_f(mu_a, w)
    omega_alpha = _invert_f(mu_b, f_a, left)
    _, f1_b = _real_f(mu_b, omega_alpha)
    E = omega_alpha + w - f_a
    return E, omega_alpha, (f1_a - 1.0) * (f1_b - 1.0)


def _edge_gap(mu_a, mu_b, w, left) -> float:
    """f − 1 in the ω-parametrization; positive where no exterior solution exists."""
    try:
        return _edge_state(mu_a, mu_b, w, left)[2] - 1.0
    except (LeftRealAxis, BracketFailure, EvaluationOnSupport, TooCloseToSupport):
        return 1.0


def _march_bracket(mu_a, mu_b, w_start: float, left: bool) -> Tuple[float, float]:
    """March from w_start toward supp μ_α until the edge equation is crossed."""
    edge = mu_a.lower if left else mu_a.upper
    step = (edge - w_start) / _MARCH_STEPS
    prev = w_start
    for k in range(1, _MARCH_STEPS):
        w = w_start + k * step
        if _edge_gap(mu_a, mu_b, w, left) >= 0.0:
            return (prev, w) if left else (w, prev)
        prev = w
    last = edge - step * 1e-9
    if _edge_gap(mu_a, mu_b, last, left) < 0.0:
        raise BracketFailure(f"edge equation not crossed before the support edge {edge!r} of mu_alpha")
    return (prev, last) if left else (last, prev)


def _locate_edge(mu_a, mu_b, w_start: float, left: bool, tol_e: float) -> SubordinationPoint:
    lo, hi = _march_bracket(mu_a, mu_b, w_start, left)
    gap = lambda w: _edge_gap(mu_a, mu_b, w, left)
    if left:
        g = gap
    else:
        # On the right f grows as w decreases; flip so the sign change matches the left side.
        g = lambda w: -gap(w)

    a = bisect(g, lo, hi, xtol=config.BRACKET_WIDTH)
    a_lo, a_hi = max(lo, a - config.BRACKET_WIDTH), min(hi, a + config.BRACKET_WIDTH)
    if np.sign(g(a_lo)) == np.sign(g(a_hi)):
        a_lo, a_hi = lo, hi
    sol = root_scalar(gap, method="secant", x0=a_lo, x1=a_hi, xtol=tol_e, maxiter=100)
    w_star = sol.root
    if not sol.converged or not (lo <= w_star <= hi) or abs(gap(w_star)) >= 1.0:
        logger.debug("secant polish left the bracket, falling back to brentq")
        w_star = brentq(g, a_lo, a_hi, xtol=tol_e)

    E, omega_alpha, _ = _edge_state(mu_a, mu_b, w_star, left)
    m_a = transform_pair(mu_a, complex(w_star, 0.0))[0]
    f_a = _real_f(mu_a, w_star)[0]
    f_b = _real_f(mu_b, omega_alpha)[0]
    return SubordinationPoint(
        z=complex(E, 0.0),
        omega_alpha=complex(omega_alpha, 0.0),
        omega_beta=complex(w_star, 0.0),
        m_value=complex(m_a.real, 0.0),
        iterations=sol.iterations,
        residual=abs(f_a - f_b),
    )


def _swap(point: SubordinationPoint) -> SubordinationPoint:
    return replace(point, omega_alpha=point.omega_beta, omega_beta=point.omega_alpha)


# ════════════════════════════════════════════════════════════════════════════
#  Edge equation
# ════════════════════════════════════════════════════════════════════════════


def edge_function(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, E: float, init: Optional[float] = None
) -> float:
    """f(E) = Î_α(ω_β(E)) · Î_β(ω_α(E)) for real E outside the support."""
    point = solve_real_outside(mu_a, mu_b, E, init=init)
    return i_hat(mu_a, point.omega_beta) * i_hat(mu_b, point.omega_alpha)


def edge_derivative(mu_a: JacobiMeasure, mu_b: JacobiMeasure, point: SubordinationPoint) -> float:
    """z̃′(ω_β) = −F′_α(ω_β) + 1 + F′_α(ω_β)/F′_β(ω_α)."""
    _, f1_a, _ = f_derivatives(mu_a, point.omega_beta)
    _, f1_b, _ = f_derivatives(mu_b, point.omega_alpha)
    return float((-f1_a + 1.0 + f1_a / f1_b).real)


def ztilde_second(mu_a: JacobiMeasure, mu_b: JacobiMeasure, point: SubordinationPoint) -> float:
    """z̃″(ω_β) from F′ and F″ of both measures at a real edge point."""
    _, f1_a, f2_a = f_derivatives(mu_a, point.omega_beta)
    _, f1_b, f2_b = f_derivatives(mu_b, point.omega_alpha)
    value = -(f2_a / f1_b) * (f1_b - 1.0) - (f2_b / f1_b**3) * f1_a**2
    return float(value.real)


# ════════════════════════════════════════════════════════════════════════════
#  Support and coefficients
# ════════════════════════════════════════════════════════════════════════════


def edge_coefficients(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, support_raw: SupportResult
) -> SupportResult:
    """
    Fill in γ^β_± and γ^α_±.

    z̃″ is negative at the lower edge and positive at the upper edge (the
    reflection x ↦ −x flips its sign); γ = √(2/|z̃″|) in both cases.
    """
    lower, upper = support_raw.points
    gammas = {}
    for label, (a, b, lo_pt, up_pt) in {
        "beta": (mu_a, mu_b, lower, upper),
        "alpha": (mu_b, mu_a, _swap(lower), _swap(upper)),
    }.items():
        zs_lo = ztilde_second(a, b, lo_pt)
        zs_up = ztilde_second(a, b, up_pt)
        if zs_lo >= 0.0:
            raise NonNegativeSecondDerivative(
                f"z''(omega_{label}) = {zs_lo:.6g} >= 0 at E_- = {support_raw.e_minus!r}"
            )
        if zs_up <= 0.0:
            raise NonNegativeSecondDerivative(
                f"-z''(omega_{label}) = {-zs_up:.6g} >= 0 at E_+ = {support_raw.e_plus!r}"
            )
        gammas[label] = (math.sqrt(-2.0 / zs_lo), math.sqrt(2.0 / zs_up))

    return replace(support_raw, gamma_beta=gammas["beta"], gamma_alpha=gammas["alpha"])


def find_support(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, tol_e: Optional[float] = None
) -> SupportResult:
    """Locate E_− and E_+ and their edge coefficients."""
    tol_e = config.EDGE_TOL if tol_e is None else tol_e
    dom = domain(mu_a, mu_b)
    logger.info(f"locating support edges in [{dom.e_lo:.6g}, {dom.e_hi:.6g}]")

    edges = []
    for E0, left in ((dom.e_lo, True), (dom.e_hi, False)):
        try:
            start = solve_real_outside(mu_a, mu_b, E0)
        except FreeConvError as e:
            raise BracketFailure(f"cannot solve at the domain boundary E={E0!r}: {e}") from e
        f0 = i_hat(mu_a, start.omega_beta) * i_hat(mu_b, start.omega_alpha)
        if f0 >= 1.0:
            raise BracketFailure(f"f({E0!r}) = {f0:.6g} >= 1; the domain rectangle is misconfigured")
        edges.append(_locate_edge(mu_a, mu_b, start.omega_beta.real, left, tol_e))

    lower, upper = edges
    e_minus, e_plus = lower.z.real, upper.z.real
    if not (dom.e_lo < e_minus < 0.0 < e_plus < dom.e_hi):
        raise BracketFailure(
            f"endpoints ({e_minus!r}, {e_plus!r}) violate E_- < 0 < E_+ inside [{dom.e_lo}, {dom.e_hi}]"
        )

    residuals = []
    for pt in edges:
        f_val = i_hat(mu_a, pt.omega_beta) * i_hat(mu_b, pt.omega_alpha)
        residuals.append(abs(f_val - 1.0))
    if max(residuals) > 10.0 * max(tol_e, 1e-9):
        logger.warning(f"edge residuals {residuals} exceed the slack for tol_e={tol_e}")

    raw = SupportResult(
        e_minus=e_minus,
        e_plus=e_plus,
        omega_alpha_at=(lower.omega_alpha.real, upper.omega_alpha.real),
        omega_beta_at=(lower.omega_beta.real, upper.omega_beta.real),
        edge_residuals=(residuals[0], residuals[1]),
        points=(lower, upper),
    )
    result = edge_coefficients(mu_a, mu_b, raw)
    logger.info(f"support [{e_minus:.12g}, {e_plus:.12g}], gamma_beta={result.gamma_beta}")
    return result


def predicted_edge_slope(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, support: SupportResult
) -> Tuple[float, float]:
    """Prefactors c_± in ρ(x) ≈ c_±·√|x − E_±| near each edge."""
    return tuple(
        gamma / math.pi * i_integral(mu_a, complex(w, 0.0))
        for gamma, w in zip(support.gamma_beta, support.omega_beta_at)
    )


def exterior_scan(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, n: int = 200
) -> Tuple[int, int]:
    """
    Count sign changes of f − 1 over n exterior points per side.

    The ladder in ω_β is geometric toward the edge of supp μ_α, reaching
    SCAN_DEPTH times the starting distance, so crossings that sit close to
    the edge are still bracketed.
    """
    dom = domain(mu_a, mu_b)
    counts = []
    for E0, left in ((dom.e_lo, True), (dom.e_hi, False)):
        w0 = solve_real_outside(mu_a, mu_b, E0).omega_beta.real
        edge = mu_a.lower if left else mu_a.upper
        ws = edge - (edge - w0) * np.geomspace(1.0, SCAN_DEPTH, n)
        signs = np.sign([_edge_gap(mu_a, mu_b, w, left) for w in ws])
        counts.append(int(np.count_nonzero(np.diff(signs))))
    return counts[0], counts[1]


def support_to_record(support: SupportResult) -> SupportRecord:
    return SupportRecord(
        E_minus=support.e_minus,
        E_plus=support.e_plus,
        omega=AlphaBeta(alpha=support.omega_alpha_at, beta=support.omega_beta_at),
        gamma=AlphaBeta(alpha=support.gamma_alpha, beta=support.gamma_beta),
        edge_residuals=support.edge_residuals,
    )
