"""
Independent ground truth for the engine.

Closed-form families live in closed_forms and are re-exported here. This
module adds the random-matrix side: spectra of A + UBU* with A, B built
from midpoint quantiles and U Haar-distributed on U(N), plus the
Kolmogorov–Smirnov distance between such a spectrum and a density grid.

Randomness comes from numpy's PCG64 generator; each sample draws from its
own child of SeedSequence(seed), so results do not depend on thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats
from scipy.linalg import eigvalsh, qr

from freeconv import config
from freeconv.closed_forms import (  # noqa: F401
    ClosedFormFamily,
    FamilyKind,
    arcsine_family,
    closed_form_density,
    closed_form_m,
    closed_form_support,
    marchenko_pastur_family,
    semicircle_family,
)
from freeconv.density import DensityGrid
from freeconv.errors import SpecError
from freeconv.measure import JacobiMeasure, quantile
from freeconv.schemas import SpectrumMetadata

logger = logging.getLogger(__name__)


# ── Domain types ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Pooled, ascending eigenvalues of n_samples matrices of size n_matrix."""
    eigenvalues: np.ndarray
    n_matrix: int
    n_samples: int
    seed: int

    def ecdf(self, x):
        out = np.searchsorted(self.eigenvalues, np.asarray(x, dtype=float), side="right")
        out = out / len(self.eigenvalues)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def mean(self) -> float:
        return float(self.eigenvalues.mean())

    @property
    def variance(self) -> float:
        return float(self.eigenvalues.var())

    def metadata(self) -> SpectrumMetadata:
        return SpectrumMetadata(n_matrix=self.n_matrix, n_samples=self.n_samples, seed=self.seed)


# ════════════════════════════════════════════════════════════════════════════
#  Random matrices
# ════════════════════════════════════════════════════════════════════════════


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n×n unitary: QR of a complex Ginibre matrix with phase-fixed R."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def midpoint_quantiles(mu: JacobiMeasure, n: int) -> np.ndarray:
    """Quantiles of μ at levels (j − ½)/n, j = 1..n."""
    levels = (np.arange(1, n + 1) - 0.5) / n
    return np.array([quantile(mu, p) for p in levels])


def _sample(a_diag: np.ndarray, b_diag: np.ndarray, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    u = haar_unitary(len(a_diag), rng)
    h = np.diag(a_diag) + (u * b_diag) @ u.conj().T
    return eigvalsh(h, check_finite=False)


def rmt_sample(
    mu_a: JacobiMeasure,
    mu_b: JacobiMeasure,
    n_matrix: int,
    n_samples: int,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> EmpiricalSpectrum:
    """Eigenvalues of A + UBU* pooled over n_samples Haar draws."""
    if n_matrix < 2:
        raise SpecError(f"n_matrix must be at least 2, got {n_matrix}")
    if n_samples < 1:
        raise SpecError(f"n_samples must be at least 1, got {n_samples}")
    seed = config.SEED if seed is None else seed
    threads = config.THREADS if threads is None else threads

    a_diag = midpoint_quantiles(mu_a, n_matrix)
    b_diag = midpoint_quantiles(mu_b, n_matrix)
    children = np.random.SeedSequence(seed).spawn(n_samples)
    logger.info(f"sampling {n_samples} matrices of size {n_matrix} (seed={seed}, threads={threads})")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: _sample(a_diag, b_diag, s), children))
    else:
        parts = [_sample(a_diag, b_diag, s) for s in children]

    eigs = np.sort(np.concatenate(parts))
    return EmpiricalSpectrum(eigenvalues=eigs, n_matrix=n_matrix, n_samples=n_samples, seed=seed)


# ════════════════════════════════════════════════════════════════════════════
#  Grid CDF and KS distance
# ════════════════════════════════════════════════════════════════════════════


def grid_cdf(grid: DensityGrid, x):
    """CDF of the grid extended by 0 below E_− and 1 above E_+ (vectorized)."""
    x = np.asarray(x, dtype=float)
    s = np.clip((grid.center - x) / grid.half_width, -1.0, 1.0)
    out = np.interp(np.arccos(s), grid.thetas, grid.cdf)
    out = np.where(x <= grid.e_minus, 0.0, np.where(x >= grid.e_plus, 1.0, out))
    return float(out) if out.ndim == 0 else out


def distance_ks(spectrum: EmpiricalSpectrum, grid: DensityGrid) -> float:
    """sup_x |F_emp(x) − F_grid(x)|."""
    result = stats.kstest(spectrum.eigenvalues, lambda x: grid_cdf(grid, x))
    return float(result.statistic)


def sample_from_grid(grid: DensityGrid, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws from the grid CDF (linear in θ, matching grid_cdf)."""
    u = rng.uniform(0.0, 1.0, size=n)
    theta = np.interp(u, grid.cdf, grid.thetas)
    return np.sort(grid.center - grid.half_width * np.cos(theta))
