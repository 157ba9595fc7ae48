"""
Analytic subordination solver for μ_α ⊞ μ_β.

The subordination functions are the unique solution of

    F_α(ω_β(z)) = F_β(ω_α(z)),    ω_α(z) + ω_β(z) − z = F_α(ω_β(z)),

with Im ω ≥ Im z. With H_μ(ω) = F_μ(ω) − ω this is the fixed point of

    ω_β ↦ Φ(ω_β) = z + H_β(z + H_α(ω_β)),    ω_α = z + H_α(ω_β),

a self-map of the upper half-plane. Φ is analytic with
Φ′(ω_β) = (F′_β(ω_α) − 1)(F′_α(ω_β) − 1), which gives a cheap Newton step;
plain and damped iteration remain the fallback whenever Newton misbehaves.

Public functions:
    - solve_point          : one spectral parameter in the upper half-plane
    - solve_real_outside   : real E outside the support
    - solve_grid           : batch driver with warm-started continuation
    - imag_ratio_limit     : I_α(ω_β)/I_β(ω_α) at a solved point
    - domain               : the rectangle 𝓔 containing the support
    - nu_mass              : subordination-distribution masses at iη
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from freeconv import config
from freeconv.errors import (
    EvaluationOnSupport,
    GridSolveError,
    LeftRealAxis,
    NoConvergence,
    SpecError,
    TooCloseToSupport,
)
from freeconv.measure import JacobiMeasure, i_integral, transform_pair, variance
from freeconv.schemas import SubordinationRecord

logger = logging.getLogger(__name__)

_THETA_MIN = 1.0 / 1024
_NEWTON_COOLDOWN = 5


# ── Domain types ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SubordinationPoint:
    z: complex
    omega_alpha: complex
    omega_beta: complex
    m_value: complex
    iterations: int
    residual: float


@dataclass(frozen=True)
class Domain:
    """Rectangle [e_lo, e_hi] × (0, eta_max] containing the convolution's support."""
    e_lo: float
    e_hi: float
    eta_max: float = 1.0

    def contains(self, z: complex) -> bool:
        z = complex(z)
        return self.e_lo <= z.real <= self.e_hi and 0.0 <= z.imag <= self.eta_max


@dataclass(frozen=True)
class _State:
    omega_beta: complex
    omega_alpha: complex
    mapped: complex
    slope: complex
    defect: float
    m_alpha: complex


# ════════════════════════════════════════════════════════════════════════════
#  Private helpers
# ════════════════════════════════════════════════════════════════════════════


def _evaluate(mu_a: JacobiMeasure, mu_b: JacobiMeasure, z: complex, omega_beta: complex) -> _State:
    m_a, f1_a, _ = transform_pair(mu_a, omega_beta)
    f_a = -1.0 / m_a
    omega_alpha = z + f_a - omega_beta
    m_b, f1_b, _ = transform_pair(mu_b, omega_alpha)
    f_b = -1.0 / m_b
    defect = max(
        abs(f_a - f_b),
        abs(omega_alpha + omega_beta - z - f_a),
        abs(m_a - m_b),
    )
    return _State(
        omega_beta=omega_beta,
        omega_alpha=omega_alpha,
        mapped=z + f_b - omega_alpha,
        slope=(f1_b - 1.0) * (f1_a - 1.0),
        defect=defect,
        m_alpha=m_a,
    )


def _to_point(z: complex, st: _State, iterations: int) -> SubordinationPoint:
    return SubordinationPoint(
        z=complex(z),
        omega_alpha=complex(st.omega_alpha),
        omega_beta=complex(st.omega_beta),
        m_value=complex(st.m_alpha),
        iterations=iterations,
        residual=float(st.defect),
    )


def _iterate(mu_a, mu_b, z, omega, tol, max_iter, newton, admissible, evaluate):
    """
    Shared fixed-point loop.

    Plain iteration first; after STAGNATION_STEPS steps without a new best
    defect the step is damped with θ = 0.5, halving on every further stall.
    A Newton candidate is taken whenever *admissible* accepts it; if the next
    defect is worse the loop reverts and pauses Newton for a few steps.
    """
    theta, best, stall, cooldown = 1.0, math.inf, 0, 0
    previous: Optional[_State] = None

    for it in range(1, max_iter + 1):
        try:
            st = evaluate(omega)
        except (LeftRealAxis, EvaluationOnSupport, TooCloseToSupport):
            if previous is None:
                raise
            st = None
        if st is not None and st.defect <= tol and admissible(st):
            return st, it

        if previous is not None and (st is None or st.defect > previous.defect or not admissible(st)):
            logger.debug(f"z={z}: Newton step rejected at iteration {it}")
            st, cooldown = previous, _NEWTON_COOLDOWN
        previous = None

        if st.defect < best:
            best, stall = st.defect, 0
        else:
            stall += 1
            if stall >= config.STAGNATION_STEPS:
                theta = 0.5 if theta == 1.0 else max(theta / 2.0, _THETA_MIN)
                stall = 0
                logger.debug(f"z={z}: stagnation, damping with theta={theta}")

        step = None
        if newton and cooldown == 0:
            denom = 1.0 - st.slope
            if denom != 0.0:
                cand = st.omega_beta - (st.omega_beta - st.mapped) / denom
                if math.isfinite(cand.real) and math.isfinite(cand.imag) and admissible(cand):
                    step, previous = cand, st
        if step is None:
            cooldown = max(cooldown - 1, 0)
            step = (1.0 - theta) * st.omega_beta + theta * st.mapped
        omega = step

    raise NoConvergence(
        f"defect {best:.3e} above tol {tol:.1e} after {max_iter} iterations at z={z}"
    )


# ════════════════════════════════════════════════════════════════════════════
#  Solvers
# ════════════════════════════════════════════════════════════════════════════


def solve_point(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    z: complex,
    init: Optional[complex] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    newton: Optional[bool] = None,
) -> SubordinationPoint:
    """Solve the subordination system at z with Im z > 0."""
    z = complex(z)
    if z.imag <= 0.0:
        raise SpecError(f"solve_point needs Im z > 0, got z={z}")
    tol = config.TOL if tol is None else tol
    max_iter = config.MAX_ITER if max_iter is None else max_iter
    newton = config.NEWTON if newton is None else newton
    if tol <= 0.0:
        raise SpecError(f"tolerance must be positive, got {tol}")

    omega = complex(init) if init is not None else z + 1j
    if omega.imag < z.imag:
        omega = complex(omega.real, z.imag + 1.0)

    def admissible(obj) -> bool:
        if isinstance(obj, _State):
            return obj.omega_alpha.imag >= z.imag - tol
        return obj.imag >= z.imag

    st, it = _iterate(
        mu_a, mu_b, z, omega, tol, max_iter, newton, admissible,
        lambda w: _evaluate(mu_a, mu_b, z, w),
    )
    return _to_point(z, st, it)


def solve_real_outside(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    E: float,
    init: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    newton: Optional[bool] = None,
) -> SubordinationPoint:
    """
    Real fixed point at E outside the support.

    Left of the support ω_β stays below supp μ_α and ω_α below supp μ_β (and
    symmetrically on the right). Starting from ω_β = E the iterates move
    monotonically toward the fixed point; leaving the exterior gap means E
    lies inside the support and raises LeftRealAxis.
    """
    E = float(E)
    tol = config.TOL if tol is None else tol
    max_iter = config.MAX_ITER if max_iter is None else max_iter
    newton = config.NEWTON if newton is None else newton
    left = E < 0.0

    def in_gap(w_beta: float, w_alpha: Optional[float] = None) -> bool:
        if left:
            ok = w_beta < mu_a.lower and (w_alpha is None or w_alpha < mu_b.lower)
        else:
            ok = w_beta > mu_a.upper and (w_alpha is None or w_alpha > mu_b.upper)
        return ok

    def admissible(obj) -> bool:
        if isinstance(obj, _State):
            return obj.slope.real < 1.0 and in_gap(obj.omega_beta.real, obj.omega_alpha.real)
        return in_gap(obj.real)

    def evaluate(w: complex) -> _State:
        if abs(w.imag) > 10.0 * tol:
            raise LeftRealAxis(f"iterate {w} left the real axis at E={E}")
        w = complex(w.real, 0.0)
        if not in_gap(w.real):
            raise LeftRealAxis(f"omega_beta={w.real!r} left the exterior gap at E={E}")
        try:
            st = _evaluate(mu_a, mu_b, complex(E, 0.0), w)
        except (EvaluationOnSupport, TooCloseToSupport) as e:
            raise LeftRealAxis(f"E={E} appears to lie inside the support: {e}") from e
        if abs(st.omega_alpha.imag) > 10.0 * tol or not in_gap(w.real, st.omega_alpha.real):
            raise LeftRealAxis(f"omega_alpha={st.omega_alpha!r} left the exterior gap at E={E}")
        return st

    omega = complex(E if init is None else float(init), 0.0)
    if not in_gap(omega.real):
        raise LeftRealAxis(f"start value {omega.real!r} is not in the exterior gap; E={E} is inside the support")

    st, it = _iterate(mu_a, mu_b, E, omega, tol, max_iter, newton, admissible, evaluate)
    real_state = _State(
        omega_beta=complex(st.omega_beta.real, 0.0),
        omega_alpha=complex(st.omega_alpha.real, 0.0),
        mapped=st.mapped,
        slope=st.slope,
        defect=st.defect,
        m_alpha=complex(st.m_alpha.real, 0.0),
    )
    return _to_point(complex(E, 0.0), real_state, it)


def _solve_chain(mu_a, mu_b, grid, chain, tol) -> Dict[int, object]:
    """Walk one continuation chain, warm-starting each point from its predecessor."""
    results: Dict[int, object] = {}
    init = None
    for idx in chain:
        try:
            point = solve_point(mu_a, mu_b, grid[idx], init=init, tol=tol)
            results[idx] = point
            init = point.omega_beta
        except Exception as e:
            logger.error(f"grid point {idx} (z={grid[idx]}) failed: {e}")
            results[idx] = e
            init = None
    return results


def solve_grid(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    grid: Sequence[complex],
    tol: Optional[float] = None,
    threads: Optional[int] = None,
) -> List[SubordinationPoint]:
    """
    Solve every grid point, returned in input order.

    Points sharing a real part form one continuation chain walked by
    descending Im z; chains are ordered by Re z and may run concurrently.
    """
    grid = [complex(z) for z in grid]
    if not grid:
        return []
    tol = config.TOL if tol is None else tol
    threads = config.THREADS if threads is None else threads

    order = sorted(range(len(grid)), key=lambda i: (-grid[i].imag, grid[i].real))
    chains: Dict[float, List[int]] = {}
    for idx in order:
        chains.setdefault(grid[idx].real, []).append(idx)
    chain_list = [chains[key] for key in sorted(chains)]
    logger.info(f"solving {len(grid)} grid points in {len(chain_list)} chain(s)")

    results: Dict[int, object] = {}
    if threads > 1 and len(chain_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(lambda c: _solve_chain(mu_a, mu_b, grid, c, tol), chain_list):
                results.update(part)
    else:
        for chain in chain_list:
            results.update(_solve_chain(mu_a, mu_b, grid, chain, tol))

    failures = [(i, r) for i, r in sorted(results.items()) if isinstance(r, Exception)]
    if failures:
        raise GridSolveError(failures)
    return [results[i] for i in range(len(grid))]


# ════════════════════════════════════════════════════════════════════════════
#  Derived quantities
# ════════════════════════════════════════════════════════════════════════════


def imag_ratio_limit(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, E: float, point: SubordinationPoint
) -> float:
    """I_α(ω_β)/I_β(ω_α): the η ↓ 0 limit of Im ω_α / Im ω_β along E + iη."""
    if abs(point.z.real - E) > 1e-12 * max(1.0, abs(E)):
        logger.warning(f"ratio limit requested at E={E} for a point solved at z={point.z}")
    return i_integral(mu_a, point.omega_beta) / i_integral(mu_b, point.omega_alpha)


def domain(mu_a: JacobiMeasure, mu_b: JacobiMeasure) -> Domain:
    """Rectangle 𝓔; widened by the larger standard deviation for extreme scale mismatch."""
    e_lo = mu_a.lower + mu_b.lower - 1.0
    e_hi = mu_a.upper + mu_b.upper + 1.0
    var_a, var_b = variance(mu_a), variance(mu_b)
    if max(var_a, var_b) > 1e6 * min(var_a, var_b):
        pad = math.sqrt(max(var_a, var_b))
        logger.info(f"variance ratio above 1e6, widening the domain by {pad:.6g}")
        e_lo, e_hi = e_lo - pad, e_hi + pad
    return Domain(e_lo=e_lo, e_hi=e_hi, eta_max=1.0)


def nu_mass(
    mu_a: JacobiMeasure, mu_b: JacobiMeasure, eta: float = 1e3, tol: Optional[float] = None
) -> Tuple[float, float]:
    """Re[−iη(ω(iη) − iη)] for ω_α and ω_β; tends to the variances of μ_α and μ_β."""
    z = 1j * eta
    point = solve_point(mu_a, mu_b, z, tol=tol)
    return (
        float((-z * (point.omega_alpha - z)).real),
        float((-z * (point.omega_beta - z)).real),
    )


def point_to_record(point: SubordinationPoint) -> SubordinationRecord:
    def pair(c: complex) -> Tuple[float, float]:
        return (float(c.real), float(c.imag))

    return SubordinationRecord(
        z=pair(point.z),
        omega_alpha=pair(point.omega_alpha),
        omega_beta=pair(point.omega_beta),
        m=pair(point.m_value),
        iterations=point.iterations,
        residual=point.residual,
    )
