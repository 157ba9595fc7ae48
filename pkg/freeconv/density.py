"""
Density of μ_α ⊞ μ_β by Stieltjes inversion on a support-adapted grid.

The grid is the Chebyshev–Lobatto set x_j = c − r·cos θ_j, θ_j = πj/(n−1),
over [E_−, E_+], so the endpoints (where ρ = 0) are included and nodes
cluster like u² near both edges. Interior values are ρ(x) = Im m(x + iη)/π.

Integration works in θ: g(θ) = ρ(x(θ))·r·sin θ is smooth and even in θ
because ρ vanishes like a square root at both edges, so its cosine series
(DCT-I) integrates spectrally. The cumulative integral of that series
gives the CDF on the grid.

Public functions:
    - density_grid : ρ, CDF and moments on the grid
    - density_at   : ρ at a single point
    - integrate    : (mass, mean, variance) of a grid
    - cdf_at       : interpolated CDF inside [E_−, E_+]
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.fft import dct, dst

from freeconv import config
from freeconv.errors import GridSolveError, OutOfSupport, SpecError
from freeconv.measure import JacobiMeasure
from freeconv.schemas import DensityMetadata
from freeconv.subordination import SubordinationPoint, solve_point
from freeconv.support import SupportResult

logger = logging.getLogger(__name__)

RICHARDSON_ETAS = (1e-4, 1e-5)


# ── Domain types ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class DensityGrid:
    xs: np.ndarray
    rho: np.ndarray
    eta_used: float
    cdf: np.ndarray
    mean: float
    variance: float
    mass: float
    e_minus: float
    e_plus: float
    thetas: np.ndarray
    omega_alpha: np.ndarray
    omega_beta: np.ndarray
    m_values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def center(self) -> float:
        return 0.5 * (self.e_minus + self.e_plus)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.e_plus - self.e_minus)


# ════════════════════════════════════════════════════════════════════════════
#  Private helpers
# ════════════════════════════════════════════════════════════════════════════


def _chebyshev_grid(e_minus: float, e_plus: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    thetas = np.pi * np.arange(n) / (n - 1)
    c, r = 0.5 * (e_minus + e_plus), 0.5 * (e_plus - e_minus)
    xs = c - r * np.cos(thetas)
    xs[0], xs[-1] = e_minus, e_plus
    return xs, thetas


def _sweep_order(n: int) -> List[List[int]]:
    """Interior indices as two outward chains starting at the midpoint."""
    mid = (n - 1) // 2
    return [list(range(mid, n - 1)), list(range(mid - 1, 0, -1))]


def _solve_sweep(mu_a, mu_b, xs, eta, tol) -> Dict[int, object]:
    """Warm-started outward sweep; the right chain seeds the left one."""
    right, left = _sweep_order(len(xs))
    results: Dict[int, object] = {}
    seed = None
    for chain in (right, left):
        init = seed
        for idx in chain:
            try:
                point = solve_point(mu_a, mu_b, complex(xs[idx], eta), init=init, tol=tol)
                results[idx] = point
                init = point.omega_beta
            except Exception as e:
                logger.error(f"density grid point {idx} (x={xs[idx]!r}) failed: {e}")
                results[idx] = e
                init = None
            if seed is None and idx == chain[0] and not isinstance(results[idx], Exception):
                seed = results[idx].omega_beta
    return results


def _solve_parallel(mu_a, mu_b, xs, eta, tol, threads) -> Dict[int, object]:
    """Two passes: a coarse serial sweep for initializers, then a parallel refine."""
    coarse = _solve_sweep(mu_a, mu_b, xs, eta, max(tol, 1e-6))
    inits = {i: p.omega_beta for i, p in coarse.items() if isinstance(p, SubordinationPoint)}

    def refine(idx: int):
        try:
            return idx, solve_point(mu_a, mu_b, complex(xs[idx], eta), init=inits.get(idx), tol=tol)
        except Exception as e:
            logger.error(f"density grid point {idx} (x={xs[idx]!r}) failed in refine: {e}")
            return idx, e

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return dict(pool.map(refine, range(1, len(xs) - 1)))


def _solve_interior(mu_a, mu_b, xs, eta, tol, threads) -> List[SubordinationPoint]:
    if threads > 1:
        results = _solve_parallel(mu_a, mu_b, xs, eta, tol, threads)
    else:
        results = _solve_sweep(mu_a, mu_b, xs, eta, tol)
    failures = [(i, r) for i, r in sorted(results.items()) if isinstance(r, Exception)]
    if failures:
        raise GridSolveError(failures)
    return [results[i] for i in range(1, len(xs) - 1)]


def _cosine_coefficients(g: np.ndarray) -> np.ndarray:
    """Coefficients a_k of g(θ) = a_0/2 + Σ a_k cos kθ (last term halved) at Lobatto nodes."""
    return dct(g, type=1) / (len(g) - 1)


def _cumulative(thetas: np.ndarray, g: np.ndarray) -> np.ndarray:
    """∫_0^θ_j g(θ) dθ from the cosine series of g."""
    N = len(g) - 1
    a = _cosine_coefficients(g)
    k = np.arange(1, N)
    out = 0.5 * a[0] * thetas
    if N > 1:
        out[1:-1] += 0.5 * dst(a[1:N] / k, type=1)
    out[0] = 0.0
    out[-1] = 0.5 * a[0] * np.pi
    return out


def _trapezoid_theta(values: np.ndarray) -> float:
    N = len(values) - 1
    return float(np.pi / N * (values.sum() - 0.5 * (values[0] + values[-1])))


# ════════════════════════════════════════════════════════════════════════════
#  Public API
# ════════════════════════════════════════════════════════════════════════════


def density_at(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    x: float,
    eta: Optional[float] = None,
    init: Optional[complex] = None,
    tol: Optional[float] = None,
) -> float:
    """ρ(x) = Im m(x + iη)/π."""
    eta = config.ETA_MIN if eta is None else eta
    if eta <= 0.0:
        raise SpecError(f"eta must be positive, got {eta}")
    point = solve_point(mu_a, mu_b, complex(x, eta), init=init, tol=tol)
    return max(point.m_value.imag, 0.0) / math.pi


def integrate(grid: DensityGrid) -> Tuple[float, float, float]:
    """(mass, mean, variance) by spectral integration in θ."""
    r = grid.half_width
    g = grid.rho * r * np.sin(grid.thetas)
    mass = _trapezoid_theta(g)
    mean = _trapezoid_theta(grid.xs * g)
    second = _trapezoid_theta((grid.xs - mean) ** 2 * g)
    return mass, mean, second


def _assemble(xs, thetas, rho, eta_used, e_minus, e_plus, points) -> DensityGrid:
    r = 0.5 * (e_plus - e_minus)
    g = rho * r * np.sin(thetas)
    cdf = np.clip(np.maximum.accumulate(_cumulative(thetas, g)), 0.0, 1.0)

    omega_a = np.zeros(len(xs), dtype=complex)
    omega_b = np.zeros(len(xs), dtype=complex)
    m_vals = np.zeros(len(xs), dtype=complex)
    for j, p in enumerate(points, start=1):
        omega_a[j], omega_b[j], m_vals[j] = p.omega_alpha, p.omega_beta, p.m_value

    partial = DensityGrid(
        xs=xs, rho=rho, eta_used=eta_used, cdf=cdf, mean=math.nan, variance=math.nan, mass=math.nan,
        e_minus=e_minus, e_plus=e_plus, thetas=thetas,
        omega_alpha=omega_a, omega_beta=omega_b, m_values=m_vals,
    )
    mass, mean, var = integrate(partial)
    return replace(partial, mass=mass, mean=mean, variance=var)


def density_grid(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    support: SupportResult,
    n: Optional[int] = None,
    eta: Optional[float] = None,
    tol: Optional[float] = None,
    threads: Optional[int] = None,
    richardson: bool = False,
) -> DensityGrid:
    """
    ρ on n Chebyshev–Lobatto points over [E_−, E_+].

    With ``richardson`` the interior values are the linear extrapolation to
    η = 0 of the solves at η = 1e-4 and 1e-5, and eta_used is reported as 0.
    """
    n = config.GRID_N if n is None else n
    eta = config.ETA_MIN if eta is None else eta
    tol = config.TOL if tol is None else tol
    threads = config.THREADS if threads is None else threads
    if n < 16:
        raise SpecError(f"grid size must be at least 16, got {n}")
    if eta <= 0.0:
        raise SpecError(f"eta must be positive, got {eta}")

    xs, thetas = _chebyshev_grid(support.e_minus, support.e_plus, n)
    logger.info(f"density grid: n={n}, eta={eta:g}, richardson={richardson}, threads={threads}")

    rho = np.zeros(n)
    if richardson:
        eta_1, eta_2 = RICHARDSON_ETAS
        coarse = _solve_interior(mu_a, mu_b, xs, eta_1, tol, threads)
        points = _solve_interior(mu_a, mu_b, xs, eta_2, tol, threads)
        rho_1 = np.array([p.m_value.imag for p in coarse]) / math.pi
        rho_2 = np.array([p.m_value.imag for p in points]) / math.pi
        rho[1:-1] = (eta_1 * rho_2 - eta_2 * rho_1) / (eta_1 - eta_2)
        eta_used = 0.0
    else:
        points = _solve_interior(mu_a, mu_b, xs, eta, tol, threads)
        rho[1:-1] = [p.m_value.imag / math.pi for p in points]
        eta_used = eta
    rho = np.maximum(rho, 0.0)

    if mu_a.is_symmetric and mu_b.is_symmetric:
        rho = 0.5 * (rho + rho[::-1])

    grid = _assemble(xs, thetas, rho, eta_used, support.e_minus, support.e_plus, points)
    if abs(grid.mass - 1.0) > 1e-6:
        logger.warning(f"density mass {grid.mass:.12g} deviates from 1 by more than 1e-6")
    logger.info(f"density grid done: mass={grid.mass:.12g}, mean={grid.mean:.3e}, variance={grid.variance:.12g}")
    return grid


def cdf_at(grid: DensityGrid, x: float) -> float:
    """CDF at x ∈ [E_−, E_+], linear in θ between grid nodes."""
    if not grid.e_minus <= x <= grid.e_plus:
        raise OutOfSupport(f"x={x!r} is outside the support [{grid.e_minus!r}, {grid.e_plus!r}]")
    if x == grid.e_minus:
        return 0.0
    s = np.clip((grid.center - x) / grid.half_width, -1.0, 1.0)
    theta = float(np.arccos(s))
    return float(np.interp(theta, grid.thetas, grid.cdf))


def grid_metadata(grid: DensityGrid) -> DensityMetadata:
    return DensityMetadata(
        eta_used=grid.eta_used,
        n=grid.n,
        E_minus=grid.e_minus,
        E_plus=grid.e_plus,
        mass=grid.mass,
        mean=grid.mean,
        variance=grid.variance,
    )
