import math

import numpy as np
import pytest

from freeconv.closed_forms import closed_form_density, semicircle_cdf, semicircle_family
from freeconv.density import cdf_at, density_at, density_grid, grid_metadata, integrate
from freeconv.errors import OutOfSupport, SpecError
from freeconv.measure import i_integral
from freeconv.support import find_support

SC2 = semicircle_family(2.0)


def _away_from_edges(grid, distance):
    return (grid.xs - grid.e_minus >= distance) & (grid.e_plus - grid.xs >= distance)


def test_density_at_center(sc1):
    assert density_at(sc1, sc1, 0.0) == pytest.approx(math.sqrt(8.0) / (4.0 * math.pi), rel=1e-6)


def test_density_at_rejects_bad_eta(sc1):
    with pytest.raises(SpecError):
        density_at(sc1, sc1, 0.0, eta=0.0)


def test_grid_layout(grid_11, support_11):
    assert grid_11.n == 129
    assert grid_11.xs[0] == support_11.e_minus
    assert grid_11.xs[-1] == support_11.e_plus
    assert grid_11.rho[0] == 0.0 and grid_11.rho[-1] == 0.0
    assert np.all(np.diff(grid_11.xs) > 0.0)
    # Lobatto nodes cluster near the edges
    assert grid_11.xs[1] - grid_11.xs[0] < grid_11.xs[65] - grid_11.xs[64]


def test_grid_matches_closed_form(grid_11):
    mask = _away_from_edges(grid_11, 1e-2)
    expected = closed_form_density(SC2, grid_11.xs[mask])
    assert np.max(np.abs(grid_11.rho[mask] - expected)) < 1e-6


def test_grid_moments(grid_11):
    assert grid_11.mass == pytest.approx(1.0, abs=1e-6)
    assert grid_11.mean == pytest.approx(0.0, abs=1e-10)
    assert grid_11.variance == pytest.approx(2.0, abs=1e-6)
    assert integrate(grid_11) == pytest.approx((grid_11.mass, grid_11.mean, grid_11.variance))


def test_grid_cdf(grid_11):
    assert grid_11.cdf[0] == 0.0
    assert np.all(np.diff(grid_11.cdf) >= 0.0)
    expected = np.array([semicircle_cdf(2.0, x) for x in grid_11.xs])
    assert np.max(np.abs(grid_11.cdf - expected)) < 1e-6


def test_cdf_at(grid_11):
    assert cdf_at(grid_11, 0.0) == pytest.approx(0.5, abs=1e-6)
    assert cdf_at(grid_11, grid_11.e_minus) == 0.0
    assert cdf_at(grid_11, grid_11.e_plus) == pytest.approx(1.0, abs=1e-6)
    assert cdf_at(grid_11, 1.0) == pytest.approx(semicircle_cdf(2.0, 1.0), abs=1e-4)


@pytest.mark.parametrize("x", [-3.0, 2.9, 10.0])
def test_cdf_outside_support(grid_11, x):
    with pytest.raises(OutOfSupport):
        cdf_at(grid_11, x)


def test_subordination_values_stay_in_upper_half_plane(grid_11):
    interior = slice(1, -1)
    assert np.all(grid_11.omega_alpha[interior].imag >= grid_11.eta_used - 1e-10)
    assert np.all(grid_11.omega_beta[interior].imag >= grid_11.eta_used - 1e-10)
    assert np.all(grid_11.m_values[interior].imag > 0.0)


def test_small_grid(sc1, support_11):
    grid = density_grid(sc1, sc1, support_11, n=17)
    assert grid.n == 17
    assert grid.mass == pytest.approx(1.0, abs=1e-6)
    assert grid.variance == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("n", [0, 2, 15])
def test_grid_size_floor(sc1, support_11, n):
    with pytest.raises(SpecError):
        density_grid(sc1, sc1, support_11, n=n)


def test_threads_match_serial(sc1, support_sc_arc, arc2):
    serial = density_grid(sc1, arc2, support_sc_arc, n=33, threads=1)
    threaded = density_grid(sc1, arc2, support_sc_arc, n=33, threads=2)
    assert np.max(np.abs(serial.rho - threaded.rho)) < 1e-10
    assert threaded.cdf[-1] == pytest.approx(serial.cdf[-1], abs=1e-10)


def test_larger_eta_is_still_accurate(sc1, support_11):
    grid = density_grid(sc1, sc1, support_11, n=65, eta=1e-7)
    mask = _away_from_edges(grid, 1e-2)
    assert np.max(np.abs(grid.rho[mask] - closed_form_density(SC2, grid.xs[mask]))) < 1e-6
    assert grid_metadata(grid).eta_used == 1e-7


def test_richardson_extrapolation(sc1, support_11):
    grid = density_grid(sc1, sc1, support_11, n=33, richardson=True)
    assert grid.eta_used == 0.0
    mask = _away_from_edges(grid, 5e-2)
    assert np.max(np.abs(grid.rho[mask] - closed_form_density(SC2, grid.xs[mask]))) < 1e-5


def test_asymmetric_pair_moments(sc1, mp_quarter):
    support = find_support(sc1, mp_quarter)
    grid = density_grid(sc1, mp_quarter, support, n=65)
    assert grid.mass == pytest.approx(1.0, abs=1e-5)
    assert grid.mean == pytest.approx(0.0, abs=1e-5)
    assert grid.variance == pytest.approx(1.25, abs=1e-4)


def test_metadata(grid_11):
    meta = grid_metadata(grid_11)
    assert meta.n == 129
    assert meta.E_minus == grid_11.e_minus
    assert meta.mass == grid_11.mass


def test_imaginary_part_chain(sc1, arc2, support_sc_arc):
    grid = density_grid(sc1, arc2, support_sc_arc, n=33)
    for j in range(1, grid.n - 1, 4):
        w = grid.omega_beta[j]
        assert abs(grid.m_values[j].imag - w.imag * i_integral(sc1, w)) <= 1e-10
