import math
from dataclasses import replace

import numpy as np
import pytest

from freeconv.closed_forms import closed_form_m, marchenko_pastur_family, semicircle_cdf
from freeconv.errors import (
    EvaluationOnSupport,
    ExponentOutOfRange,
    NonPositiveSmoothFactor,
    QuantileFailure,
    SpecError,
    TooCloseToSupport,
)
from freeconv.measure import (
    cdf,
    density,
    f_derivatives,
    from_spec,
    hat_mass,
    i_hat,
    i_integral,
    make_jacobi,
    moment,
    quantile,
    reciprocal_f,
    stieltjes,
    to_spec,
    transform_pair,
    variance,
)
from freeconv.schemas import parse_measure_spec


def test_semicircle_moments(sc1):
    assert moment(sc1, 0) == pytest.approx(1.0, abs=1e-13)
    assert moment(sc1, 1) == pytest.approx(0.0, abs=1e-13)
    assert moment(sc1, 2) == pytest.approx(1.0, abs=1e-12)
    assert moment(sc1, 4) == pytest.approx(2.0, abs=1e-12)


def test_arcsine_second_moment(arc2):
    assert moment(arc2, 2) == pytest.approx(2.0, abs=1e-12)


def test_negative_moment_order_rejected(sc1):
    with pytest.raises(ValueError):
        moment(sc1, -1)


def test_stieltjes_semicircle_at_i(sc1):
    m = stieltjes(sc1, 1j)
    assert m.real == pytest.approx(0.0, abs=1e-13)
    assert m.imag == pytest.approx(0.6180339887, abs=1e-10)


def test_stieltjes_arcsine_at_i(arc2):
    assert stieltjes(arc2, 1j) == pytest.approx(0.4472135955j, abs=1e-10)


def test_stieltjes_matches_marchenko_pastur_closed_form(mp_quarter):
    z = 0.3 + 0.5j
    fam = marchenko_pastur_family(0.25)
    assert stieltjes(mp_quarter, z) == pytest.approx(closed_form_m(fam, z), abs=1e-10)
    assert variance(mp_quarter) == pytest.approx(0.25, abs=1e-12)


def test_stieltjes_off_axis_far_field(sc1):
    z = 1e6j
    assert reciprocal_f(sc1, z) / z == pytest.approx(1.0, abs=1e-9)


def test_real_point_in_support_rejected(sc1):
    with pytest.raises(EvaluationOnSupport):
        stieltjes(sc1, 0.5)
    with pytest.raises(EvaluationOnSupport):
        stieltjes(sc1, complex(sc1.lower, 0.0))


def test_support_floor(sc1):
    with pytest.raises(TooCloseToSupport):
        f_derivatives(sc1, complex(sc1.lower - 1e-14, 0.0))


def test_exponent_range_enforced():
    with pytest.raises(ExponentOutOfRange):
        make_jacobi(-1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ExponentOutOfRange):
        make_jacobi(-1.0, 1.0, 0.0, -1.0)


def test_smooth_factor_must_be_positive():
    # 1 + 2s reaches -1 at the left end.
    with pytest.raises(NonPositiveSmoothFactor):
        make_jacobi(-1.0, 1.0, 0.0, 0.0, (1.0, 2.0))


def test_empty_interval_rejected():
    with pytest.raises(SpecError):
        make_jacobi(1.0, 1.0, 0.0, 0.0)


def test_construction_centers_and_records_shift():
    mu = make_jacobi(0.0, 1.0, 0.0, 0.5)
    assert moment(mu, 1) == pytest.approx(0.0, abs=1e-13)
    assert mu.shift < 0.0
    assert mu.user_support == (0.0, 1.0)
    assert mu.lower == pytest.approx(mu.shift, abs=1e-15)


def test_spec_round_trip():
    mu = make_jacobi(-1.0, 3.0, -0.5, 0.5, (1.0, 0.2))
    again = from_spec(parse_measure_spec(to_spec(mu).model_dump_json()))
    assert again == mu


def test_f_derivatives_match_transform_pair(sc1):
    w = -3.0 + 0.0j
    f0, f1, f2 = f_derivatives(sc1, w)
    m, f1_pair, i_val = transform_pair(sc1, w)
    assert f0 == pytest.approx(-1.0 / m, rel=1e-12)
    assert f1 == pytest.approx(f1_pair, rel=1e-12)
    assert i_val == pytest.approx(i_integral(sc1, w), rel=1e-12)
    # σ_1: F(ω) = ω + m(ω), so F″ = m″ > 0 left of the support.
    assert f2.real > 0.0


def test_i_hat_on_real_axis_is_f_prime_minus_one(sc1):
    w = -3.0 + 0.0j
    _, f1, _ = f_derivatives(sc1, w)
    assert i_hat(sc1, w) == pytest.approx(f1.real - 1.0, abs=1e-12)


def test_i_hat_complex_identity(arc2):
    w = 0.4 + 0.7j
    m = stieltjes(arc2, w)
    expected = m.imag / (abs(m) ** 2 * w.imag) - 1.0
    assert i_hat(arc2, w) == pytest.approx(expected, rel=1e-10)


def test_hat_mass_is_variance(sc4, arc2):
    assert hat_mass(sc4) == pytest.approx(4.0, rel=1e-4)
    assert hat_mass(arc2) == pytest.approx(2.0, rel=1e-4)


def test_density_and_cdf_of_semicircle(sc1):
    assert density(sc1, 0.0) == pytest.approx(1.0 / math.pi, rel=1e-13)
    assert density(sc1, 3.0) == 0.0
    xs = np.array([-1.9, -1.0, 0.0, 0.7, 1.99])
    for x in xs:
        assert cdf(sc1, x) == pytest.approx(semicircle_cdf(1.0, x), abs=1e-12)
    assert cdf(sc1, -5.0) == 0.0
    assert cdf(sc1, 5.0) == 1.0


def test_quantile_inverts_cdf(arc2):
    assert quantile(arc2, 0.5) == pytest.approx(0.0, abs=1e-12)
    x = quantile(arc2, 0.1)
    assert cdf(arc2, x) == pytest.approx(0.1, abs=1e-12)
    # arcsine CDF: 1/2 + arcsin(x/r)/π
    assert x == pytest.approx(2.0 * math.sin(math.pi * (0.1 - 0.5)), abs=1e-10)


@pytest.mark.parametrize("p", [0.3, 0.75, 1e-4])
def test_quantile_of_semicircle(sc1, p):
    x = quantile(sc1, p)
    assert sc1.lower < x < sc1.upper
    assert semicircle_cdf(1.0, x) == pytest.approx(p, abs=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
def test_quantile_outside_unit_interval(sc1, p):
    with pytest.raises(QuantileFailure):
        quantile(sc1, p)


@pytest.mark.parametrize(
    "args, norm, shift",
    [
        ((-2.0, 2.0, 0.5, 0.5), 2.0 * math.pi, 0.0),
        ((0.0, 1.0, 0.0, 0.0), 1.0, -0.5),
        ((-2.0, 2.0, -0.5, -0.5), math.pi, 0.0),
    ],
)
def test_normalization_constants(args, norm, shift):
    mu = make_jacobi(*args)
    assert mu.norm_const == pytest.approx(norm, rel=1e-12)
    assert mu.shift == pytest.approx(shift, abs=1e-13)
    assert moment(mu, 0) == pytest.approx(1.0, abs=1e-13)


def test_reciprocal_f_values(sc1):
    assert reciprocal_f(sc1, 1j) == pytest.approx(1.6180339887j, abs=1e-10)
    # m_{σ_1}(−3) = (3 − √5)/2
    assert reciprocal_f(sc1, -3.0) == pytest.approx(-2.0 / (3.0 - math.sqrt(5.0)), rel=1e-12)


@pytest.mark.parametrize(
    "w, expected",
    [(-3.0 / math.sqrt(2.0), 1.0), (-(3.0 + math.sqrt(0.5)), (math.sqrt(2.0) - 1.0) / (math.sqrt(2.0) + 3.0))],
)
def test_f_prime_minus_one_for_semicircle(sc1, w, expected):
    # semicircle: F′ − 1 = m′ = −m/(2m + w)
    _, f1, _ = f_derivatives(sc1, w)
    assert f1.real - 1.0 == pytest.approx(expected, rel=1e-9)
    assert i_hat(sc1, w) == pytest.approx(expected, rel=1e-9)
    assert i_integral(sc1, w) == pytest.approx(expected, rel=1e-9)


def test_i_integral_complex(sc1):
    w = 2.3660254037844386j
    assert i_integral(sc1, w) == pytest.approx(stieltjes(sc1, w).imag / w.imag, rel=1e-12)
    assert i_integral(sc1, w) == pytest.approx(0.3660254037844386 / 2.3660254037844386, rel=1e-10)
    assert i_integral(sc1, 1e8j) < 1e-15


def test_herglotz_property(arc2, mp_quarter):
    rng = np.random.default_rng(0)
    zs = rng.uniform(-5.0, 5.0, 200) + 1j * rng.uniform(1e-3, 3.0, 200)
    for mu in (arc2, mp_quarter):
        for z in zs:
            m = stieltjes(mu, z)
            assert m.imag > 0.0
            assert (-1.0 / m).imag >= z.imag - 1e-12


def test_real_axis_signs(mp_quarter):
    for x in np.linspace(mp_quarter.lower - 5.0, mp_quarter.lower - 1e-3, 20):
        assert stieltjes(mp_quarter, x).real > 0.0
    for x in np.linspace(mp_quarter.upper + 1e-3, mp_quarter.upper + 5.0, 20):
        assert stieltjes(mp_quarter, x).real < 0.0


def test_symmetric_measure_reflection(arc2):
    assert arc2.is_symmetric
    z = 0.7 + 0.3j
    assert stieltjes(arc2, -z.conjugate()) == pytest.approx(-stieltjes(arc2, z).conjugate(), abs=1e-12)
    assert stieltjes(arc2, 0.5j).real == pytest.approx(0.0, abs=1e-14)


def test_i_hat_blows_up_at_the_edges(mp_quarter):
    for edge, sign in ((mp_quarter.lower, -1.0), (mp_quarter.upper, 1.0)):
        values = [i_hat(mp_quarter, edge + sign * 10.0**-k) for k in range(1, 6)]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_quadrature_converged_near_support(mp_quarter):
    z = complex(mp_quarter.upper + 0.1, 0.0)
    m = stieltjes(mp_quarter, z)
    again = stieltjes(replace(mp_quarter, base_order=1024), z)
    assert abs(again - m) <= 1e-10 * abs(m)
