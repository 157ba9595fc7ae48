"""
Jacobi-type probability measures and their Stieltjes-analytic toolkit.

A measure has density

    ρ(x) = (x − lower)^t_minus · (upper − x)^t_plus · h(x) / Z

on a single interval, with exponents in (−1, 1) and a strictly positive
smooth factor h given by Chebyshev coefficients on [lower, upper]. Every
integral against μ is done with a Gauss–Jacobi rule matched to the endpoint
exponents, so the edge singularities are absorbed into the rule weights.

Public functions:
    - make_jacobi / make_semicircle / make_arcsine / make_marchenko_pastur
    - from_spec / to_spec             : measure JSON round-trip
    - stieltjes / reciprocal_f        : m_μ and F_μ = −1/m_μ
    - f_derivatives                   : F, F′, F″
    - i_integral / i_hat              : I_μ(w) and Î_μ(w)
    - moment / variance / hat_mass    : moments and the hat-measure mass
    - density / cdf / quantile        : pointwise density, CDF and inverse CDF
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev
from scipy.optimize import brentq
from scipy.special import roots_jacobi

from freeconv import config
from freeconv.errors import (
    EvaluationOnSupport,
    ExponentOutOfRange,
    NonPositiveSmoothFactor,
    QuantileFailure,
    SpecError,
    TooCloseToSupport,
)
from freeconv.schemas import (
    ArcsineSpec,
    JacobiSpec,
    MarchenkoPasturSpec,
    MeasureSpec,
    SemicircleSpec,
)

logger = logging.getLogger(__name__)

# ln(1e16): the Gauss error decays like ρ^(−2n) with ρ the Bernstein ellipse parameter.
_LOG_EPS = 36.85
_ORDER_MARGIN = 16


# ── Domain types ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights integrating against μ itself."""
    nodes: np.ndarray
    weights: np.ndarray
    order: int


@dataclass(frozen=True)
class JacobiMeasure:
    """Centered probability measure with single-interval Jacobi-type density."""
    lower: float
    upper: float
    t_minus: float
    t_plus: float
    smooth_coeffs: Tuple[float, ...] = (1.0,)
    norm_const: float = 1.0
    shift: float = 0.0
    base_order: int = 64
    user_support: Tuple[float, float] = (0.0, 0.0)

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)

    @property
    def is_symmetric(self) -> bool:
        odd = self.smooth_coeffs[1::2]
        return (
            self.t_minus == self.t_plus
            and abs(self.lower + self.upper) <= 1e-12 * self.half_width
            and all(abs(c) <= 1e-14 * abs(self.smooth_coeffs[0]) for c in odd)
        )


# ════════════════════════════════════════════════════════════════════════════
#  Private helpers
# ════════════════════════════════════════════════════════════════════════════


@lru_cache(maxsize=128)
def _reference_rule(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Jacobi rule on [−1, 1] for the weight (1 − s)^alpha (1 + s)^beta."""
    s, w = roots_jacobi(n, alpha, beta)
    return s, w


def _smooth_factor(coeffs: Sequence[float], s: np.ndarray) -> np.ndarray:
    return chebyshev.chebval(s, np.asarray(coeffs, dtype=float))


def _raw_rule(lower, upper, t_minus, t_plus, coeffs, n):
    """Nodes in x and un-normalized weights of (x−a)^t− (b−x)^t+ h(x) dx."""
    s, w = _reference_rule(n, t_plus, t_minus)
    c, r = 0.5 * (lower + upper), 0.5 * (upper - lower)
    x = c + r * s
    scale = r ** (t_minus + t_plus + 1.0)
    return x, w * _smooth_factor(coeffs, s) * scale


@lru_cache(maxsize=256)
def _measure_rule(mu: JacobiMeasure, n: int) -> QuadratureRule:
    x, w = _raw_rule(mu.lower, mu.upper, mu.t_minus, mu.t_plus, mu.smooth_coeffs, n)
    return QuadratureRule(nodes=x, weights=w / mu.norm_const, order=n)


def _round_order(n: int) -> int:
    order = config.QUAD_MIN
    while order < n and order < config.QUAD_MAX:
        order *= 2
    return min(order, config.QUAD_MAX)


def _ellipse_parameter(mu: JacobiMeasure, w: complex) -> float:
    """Bernstein ellipse parameter of w relative to the support interval."""
    s = (complex(w) - mu.center) / mu.half_width
    return abs(s + np.sqrt(s - 1) * np.sqrt(s + 1))


def _order_for(mu: JacobiMeasure, w: complex) -> int:
    rho = _ellipse_parameter(mu, w)
    if rho <= 1.0 + 1e-15:
        return config.QUAD_MAX
    needed = int(math.ceil(_LOG_EPS / (2.0 * math.log(rho)))) + _ORDER_MARGIN
    order = max(mu.base_order, _round_order(needed))
    if order > mu.base_order:
        logger.debug(f"quadrature order {order} for w={w} (rho={rho:.6g})")
    return order


def _distance_to_support(mu: JacobiMeasure, w: complex) -> float:
    w = complex(w)
    dx = max(mu.lower - w.real, 0.0, w.real - mu.upper)
    return math.hypot(dx, w.imag)


def _check_off_support(mu: JacobiMeasure, w: complex) -> None:
    w = complex(w)
    if w.imag == 0.0 and mu.lower <= w.real <= mu.upper:
        raise EvaluationOnSupport(
            f"real point {w.real!r} lies in the support [{mu.lower!r}, {mu.upper!r}]"
        )


def _check_floor(mu: JacobiMeasure, w: complex, floor: float = None) -> None:
    _check_off_support(mu, w)
    floor = config.SUPPORT_FLOOR if floor is None else floor
    dist = _distance_to_support(mu, w)
    if dist < floor:
        raise TooCloseToSupport(
            f"dist(w={complex(w)!r}, support) = {dist:.3e} is below the floor {floor:.1e}"
        )


def _resolvents(mu: JacobiMeasure, w: complex, count: int):
    """Return [∫dμ/(x−w), ∫dμ/(x−w)², ...] up to *count* powers."""
    rule = _measure_rule(mu, _order_for(mu, w))
    inv = 1.0 / (rule.nodes - complex(w))
    out, term = [], rule.weights.astype(complex)
    for _ in range(count):
        term = term * inv
        out.append(complex(term.sum()))
    return out


# ════════════════════════════════════════════════════════════════════════════
#  Construction
# ════════════════════════════════════════════════════════════════════════════


def make_jacobi(
    lower: float,
    upper: float,
    t_minus: float,
    t_plus: float,
    smooth_coeffs: Sequence[float] = (1.0,),
) -> JacobiMeasure:
    """Normalize and center a Jacobi-type measure; the applied offset is kept in ``shift``."""
    lower, upper = float(lower), float(upper)
    if not lower < upper:
        raise SpecError(f"support must be a non-empty interval, got [{lower}, {upper}]")
    for name, t in (("t_minus", t_minus), ("t_plus", t_plus)):
        if not -1.0 < t < 1.0:
            raise ExponentOutOfRange(f"{name} = {t} is outside (-1, 1)")
    coeffs = tuple(float(c) for c in smooth_coeffs) or (1.0,)

    probe = np.cos(np.linspace(0.0, np.pi, max(2049, 8 * len(coeffs) + 1)))
    h_min = float(_smooth_factor(coeffs, probe).min())
    if h_min <= 0.0:
        raise NonPositiveSmoothFactor(f"smooth factor reaches {h_min:.3e} <= 0 on the support")

    # Grow the rule until the total mass is resolved.
    order, previous = config.QUAD_MIN, None
    while True:
        x, w = _raw_rule(lower, upper, t_minus, t_plus, coeffs, order)
        mass = float(w.sum())
        if previous is not None and abs(mass - previous) <= config.QUAD_RTOL * abs(mass):
            break
        if order >= config.QUAD_MAX:
            logger.warning(f"normalization not resolved at {order} nodes (mass={mass})")
            break
        previous, order = mass, order * 2

    mean = float((x * w).sum()) / mass
    mu = JacobiMeasure(
        lower=lower - mean,
        upper=upper - mean,
        t_minus=float(t_minus),
        t_plus=float(t_plus),
        smooth_coeffs=coeffs,
        norm_const=mass,
        shift=-mean,
        base_order=order,
        user_support=(lower, upper),
    )
    logger.debug(f"built {mu} with h_min={h_min:.3e}")
    return mu


def make_semicircle(variance: float = 1.0) -> JacobiMeasure:
    radius = 2.0 * math.sqrt(variance)
    return make_jacobi(-radius, radius, 0.5, 0.5)


def make_arcsine(radius: float = 2.0) -> JacobiMeasure:
    return make_jacobi(-radius, radius, -0.5, -0.5)


def make_marchenko_pastur(ratio: float) -> JacobiMeasure:
    """Marchenko–Pastur law of ratio λ ∈ (0, 1), unit scale, centered at its mean 1."""
    if not 0.0 < ratio < 1.0:
        raise SpecError(f"Marchenko-Pastur ratio must lie in (0, 1), got {ratio}")
    a, b = (1.0 - math.sqrt(ratio)) ** 2, (1.0 + math.sqrt(ratio)) ** 2
    deg = 16
    while True:
        cheb = chebyshev.Chebyshev.interpolate(lambda x: 1.0 / x, deg, domain=[a, b])
        tail = np.abs(cheb.coef[-4:]).max()
        if tail <= 1e-15 * abs(cheb.coef[0]) or deg >= 1024:
            break
        deg *= 2
    return make_jacobi(a, b, 0.5, 0.5, chebyshev.chebtrim(cheb.coef, 1e-17))


def from_spec(spec: MeasureSpec) -> JacobiMeasure:
    if isinstance(spec, SemicircleSpec):
        return make_semicircle(spec.variance)
    if isinstance(spec, ArcsineSpec):
        return make_arcsine(spec.radius)
    if isinstance(spec, MarchenkoPasturSpec):
        return make_marchenko_pastur(spec.ratio)
    if isinstance(spec, JacobiSpec):
        lower, upper = spec.support
        return make_jacobi(lower, upper, spec.t_minus, spec.t_plus, spec.smooth_cheb)
    raise SpecError(f"unsupported measure spec {spec!r}")


def to_spec(mu: JacobiMeasure) -> JacobiSpec:
    """Jacobi spec in the user's coordinates; re-parsing reproduces *mu*."""
    return JacobiSpec(
        support=mu.user_support,
        t_minus=mu.t_minus,
        t_plus=mu.t_plus,
        smooth_cheb=list(mu.smooth_coeffs),
    )


# ════════════════════════════════════════════════════════════════════════════
#  Transforms
# ════════════════════════════════════════════════════════════════════════════


def stieltjes(mu: JacobiMeasure, z: complex) -> complex:
    """m_μ(z) = ∫ dμ(x)/(x − z)."""
    _check_off_support(mu, z)
    return _resolvents(mu, z, 1)[0]


def reciprocal_f(mu: JacobiMeasure, z: complex) -> complex:
    """F_μ(z) = −1/m_μ(z)."""
    return -1.0 / stieltjes(mu, z)


def f_derivatives(mu: JacobiMeasure, w: complex, floor: float = None) -> Tuple[complex, complex, complex]:
    """F_μ(w), F′_μ(w), F″_μ(w) from m, m′ and m″."""
    _check_floor(mu, w, floor)
    m, m1, m2_half = _resolvents(mu, w, 3)
    m2 = 2.0 * m2_half
    f0 = -1.0 / m
    f1 = m1 / m**2
    f2 = m2 / m**2 - 2.0 * m1**2 / m**3
    return f0, f1, f2


def transform_pair(mu: JacobiMeasure, w: complex, floor: float = None) -> Tuple[complex, complex, float]:
    """(m, F′, I) at w from a single quadrature pass; used by the solver loop."""
    _check_floor(mu, w, floor)
    rule = _measure_rule(mu, _order_for(mu, w))
    diff = rule.nodes - complex(w)
    inv = 1.0 / diff
    m = complex((rule.weights * inv).sum())
    m1 = complex((rule.weights * inv * inv).sum())
    i_val = float((rule.weights / (diff.real**2 + diff.imag**2)).sum())
    return m, m1 / m**2, i_val


def i_integral(mu: JacobiMeasure, w: complex, floor: float = None) -> float:
    """I_μ(w) = ∫ dμ(x)/|x − w|²."""
    _check_floor(mu, w, floor)
    rule = _measure_rule(mu, _order_for(mu, w))
    diff = rule.nodes - complex(w)
    return float((rule.weights / (diff.real**2 + diff.imag**2)).sum())


def i_hat(mu: JacobiMeasure, w: complex, floor: float = None) -> float:
    """Î_μ(w) = I_μ(w)/|m_μ(w)|² − 1, which equals F′_μ(w) − 1 on the real axis."""
    _check_floor(mu, w, floor)
    m = _resolvents(mu, w, 1)[0]
    return i_integral(mu, w, floor) / abs(m) ** 2 - 1.0


# ════════════════════════════════════════════════════════════════════════════
#  Moments, density, CDF
# ════════════════════════════════════════════════════════════════════════════


def moment(mu: JacobiMeasure, k: int) -> float:
    if k < 0:
        raise ValueError(f"moment order must be non-negative, got {k}")
    rule = _measure_rule(mu, max(mu.base_order, _round_order(k // 2 + 1)))
    return float((rule.weights * rule.nodes**k).sum())


def variance(mu: JacobiMeasure) -> float:
    return moment(mu, 2) - moment(mu, 1) ** 2


def hat_mass(mu: JacobiMeasure, eta: float = 1e3) -> float:
    """−Re[iη(F_μ(iη) − iη)], which tends to ∫x²dμ as η → ∞."""
    w = 1j * eta
    return float(-(w * (reciprocal_f(mu, w) - w)).real)


def density(mu: JacobiMeasure, x):
    """ρ_μ(x); zero outside the open support."""
    x = np.asarray(x, dtype=float)
    inside = (x > mu.lower) & (x < mu.upper)
    xi = np.where(inside, x, mu.center)
    s = (xi - mu.center) / mu.half_width
    rho = (xi - mu.lower) ** mu.t_minus * (mu.upper - xi) ** mu.t_plus
    rho = rho * _smooth_factor(mu.smooth_coeffs, s) / mu.norm_const
    out = np.where(inside, rho, 0.0)
    return float(out) if out.ndim == 0 else out


def _left_mass(mu: JacobiMeasure, x: float) -> float:
    # ∫_lower^x with the lower-edge singularity absorbed by the rule.
    s, w = _reference_rule(mu.base_order, 0.0, mu.t_minus)
    half = 0.5 * (x - mu.lower)
    y = mu.lower + half * (1.0 + s)
    h = _smooth_factor(mu.smooth_coeffs, (y - mu.center) / mu.half_width)
    total = half ** (mu.t_minus + 1.0) * (w * (mu.upper - y) ** mu.t_plus * h).sum()
    return float(total) / mu.norm_const


def _right_mass(mu: JacobiMeasure, x: float) -> float:
    s, w = _reference_rule(mu.base_order, mu.t_plus, 0.0)
    half = 0.5 * (mu.upper - x)
    y = x + half * (1.0 + s)
    h = _smooth_factor(mu.smooth_coeffs, (y - mu.center) / mu.half_width)
    total = half ** (mu.t_plus + 1.0) * (w * (y - mu.lower) ** mu.t_minus * h).sum()
    return float(total) / mu.norm_const


def cdf(mu: JacobiMeasure, x: float) -> float:
    """μ((−∞, x]) by split Gauss–Jacobi quadrature around the midpoint."""
    if x <= mu.lower:
        return 0.0
    if x >= mu.upper:
        return 1.0
    if x <= mu.center:
        return min(max(_left_mass(mu, x), 0.0), 1.0)
    return min(max(1.0 - _right_mass(mu, x), 0.0), 1.0)


def quantile(mu: JacobiMeasure, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise QuantileFailure(f"quantile level {p} is outside (0, 1)")
    try:
        return float(brentq(lambda x: cdf(mu, x) - p, mu.lower, mu.upper, xtol=1e-14, rtol=4 * np.finfo(float).eps))
    except (ValueError, RuntimeError) as e:
        raise QuantileFailure(f"CDF inversion at p={p} failed to bracket: {e}") from e
