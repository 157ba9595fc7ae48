import math

import numpy as np
import pytest

from freeconv.closed_forms import (
    FamilyKind,
    arcsine_family,
    closed_form_density,
    closed_form_m,
    closed_form_support,
    family_variance,
    marchenko_pastur_family,
    semicircle_cdf,
    semicircle_family,
)
from freeconv.errors import EvaluationOnSupport, SpecError


@pytest.mark.parametrize(
    "fam, z, expected",
    [
        (semicircle_family(1.0), 1j, 0.6180339887j),
        (semicircle_family(2.0), 2j, 0.3660254038j),
        (arcsine_family(2.0), 1j, 0.4472135955j),
    ],
)
def test_closed_form_values(fam, z, expected):
    assert closed_form_m(fam, z) == pytest.approx(expected, abs=1e-10)


def test_branch_has_positive_imaginary_part():
    zs = np.array([-3.0 + 0.1j, -0.5 + 1e-6j, 0.2 + 2j, 5.0 + 0.3j])
    for fam in (semicircle_family(1.5), arcsine_family(1.0), marchenko_pastur_family(0.4)):
        assert np.all(closed_form_m(fam, zs).imag > 0.0)


def test_real_axis_outside_support_gives_real_value():
    m = closed_form_m(semicircle_family(2.0), -4.0)
    # m_{σ_2}(−4) = (4 − √8)/4
    assert m == pytest.approx((4.0 - math.sqrt(8.0)) / 4.0, abs=1e-15)


def test_on_support_rejected():
    with pytest.raises(EvaluationOnSupport):
        closed_form_m(semicircle_family(1.0), 1.0)


def test_marchenko_pastur_ratio_range():
    with pytest.raises(SpecError):
        marchenko_pastur_family(1.0)


@pytest.mark.parametrize(
    "fam",
    [semicircle_family(1.0), semicircle_family(3.0), arcsine_family(2.0), marchenko_pastur_family(0.25)],
)
def test_inversion_reproduces_density(fam):
    a, b = closed_form_support(fam)
    xs = a + (b - a) * np.array([0.1, 0.3, 0.5, 0.77, 0.9])
    inverted = closed_form_m(fam, xs + 1e-12j).imag / math.pi
    assert np.max(np.abs(inverted - closed_form_density(fam, xs))) < 1e-8


def test_density_vanishes_outside():
    fam = semicircle_family(1.0)
    assert closed_form_density(fam, 2.5) == 0.0
    assert closed_form_density(fam, -2.0) == 0.0


def test_family_metadata():
    fam = marchenko_pastur_family(0.25)
    assert fam.kind is FamilyKind.MARCHENKO_PASTUR
    assert closed_form_support(fam) == pytest.approx((0.25 - 1.0, 2.25 - 1.0))
    assert family_variance(fam) == 0.25
    assert family_variance(arcsine_family(2.0)) == 2.0


def test_semicircle_cdf_endpoints():
    assert semicircle_cdf(2.0, -10.0) == 0.0
    assert semicircle_cdf(2.0, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert semicircle_cdf(2.0, 10.0) == pytest.approx(1.0, abs=1e-15)
