import math
from dataclasses import replace

import pytest

from freeconv.errors import NonNegativeSecondDerivative
from freeconv.measure import make_semicircle, reciprocal_f
from freeconv.suites import random_jacobi_pairs
from freeconv.support import (
    _edge_state,
    _invert_f,
    edge_coefficients,
    edge_derivative,
    edge_function,
    exterior_scan,
    find_support,
    predicted_edge_slope,
    support_to_record,
    ztilde_second,
)

EDGE_2 = 2.0 * math.sqrt(2.0)  # σ_1 ⊞ σ_1 = σ_2 lives on [−2√2, 2√2]


def test_edge_function_far_left(sc1):
    # f = m′(ω)² for identical semicircles; ω = −4 + m_{σ_2}(−4)
    assert edge_function(sc1, sc1, -4.0) == pytest.approx(0.008806, rel=1e-2)


def test_edge_function_increases_toward_the_edge(sc1, arc2):
    values = [edge_function(sc1, arc2, E) for E in (-8.0, -6.0, -4.5, -3.5)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert 0.0 < values[0] and values[-1] < 1.0


def test_semicircle_support(support_11):
    assert support_11.e_minus == pytest.approx(-EDGE_2, abs=1e-8)
    assert support_11.e_plus == pytest.approx(EDGE_2, abs=1e-8)
    assert support_11.width == pytest.approx(2.0 * EDGE_2, abs=2e-8)


def test_semicircle_subordination_at_edges(support_11):
    # ω = E + m_{σ_2}(E) with m_{σ_2}(∓2√2) = ±√2/2
    lo, hi = support_11.omega_beta_at
    assert lo == pytest.approx(-1.5 * math.sqrt(2.0), abs=1e-6)
    assert hi == pytest.approx(1.5 * math.sqrt(2.0), abs=1e-6)
    assert support_11.omega_alpha_at == pytest.approx(support_11.omega_beta_at, abs=1e-8)


def test_semicircle_edge_coefficients(sc1, support_11):
    gamma = 2.0 ** 1.25 / 4.0
    assert support_11.gamma_beta == pytest.approx((gamma, gamma), rel=1e-6)
    assert support_11.gamma_alpha == pytest.approx((gamma, gamma), rel=1e-6)
    lower, upper = support_11.points
    assert ztilde_second(sc1, sc1, lower) == pytest.approx(-4.0 * math.sqrt(2.0), rel=1e-6)
    assert ztilde_second(sc1, sc1, upper) == pytest.approx(4.0 * math.sqrt(2.0), rel=1e-6)


def test_edge_derivative_vanishes(sc1, support_11):
    for point in support_11.points:
        assert abs(edge_derivative(sc1, sc1, point)) < 1e-6


def test_edge_residuals_small(support_11, support_sc_arc):
    assert max(support_11.edge_residuals) < 1e-6
    assert max(support_sc_arc.edge_residuals) < 1e-6


def test_predicted_slope_matches_semicircle(sc1, support_11):
    # ρ_{σ_2}(x) ≈ √(4√2)/(4π)·√s near either edge
    c = math.sqrt(4.0 * math.sqrt(2.0)) / (4.0 * math.pi)
    assert predicted_edge_slope(sc1, sc1, support_11) == pytest.approx((c, c), rel=1e-6)


def test_variances_add_for_semicircles(sc1, sc4):
    support = find_support(sc1, sc4)
    assert support.e_minus == pytest.approx(-2.0 * math.sqrt(5.0), abs=1e-8)
    assert support.e_plus == pytest.approx(2.0 * math.sqrt(5.0), abs=1e-8)


def test_semicircle_arcsine_support(support_sc_arc):
    # z = ω − m_arc(ω) with the edge at m′_arc(ω) = 1
    assert support_sc_arc.e_minus == pytest.approx(-3.1537, abs=5e-3)
    assert support_sc_arc.e_plus == pytest.approx(-support_sc_arc.e_minus, abs=1e-8)
    assert support_sc_arc.omega_alpha_at[0] == pytest.approx(-2.4077, abs=5e-3)
    assert all(g > 0.0 for g in support_sc_arc.gamma_beta + support_sc_arc.gamma_alpha)


def test_marchenko_pastur_pair_support(sc1, mp_quarter):
    support = find_support(mp_quarter, sc1)
    assert support.e_minus < 0.0 < support.e_plus
    assert support.e_plus - support.e_minus > mp_quarter.upper - mp_quarter.lower
    assert exterior_scan(mp_quarter, sc1, n=60) == (1, 1)


def test_exterior_has_single_crossing(sc1):
    assert exterior_scan(sc1, sc1) == (1, 1)


@pytest.mark.parametrize("w, left", [(4.7808, False), (-3.5, True)])
def test_f_inverse_recovers_point(sc1, w, left):
    target = reciprocal_f(sc1, complex(w, 0.0)).real
    assert _invert_f(sc1, target, left) == pytest.approx(w, abs=1e-10)


def test_edge_state_for_equal_semicircles(sc1):
    # symmetric pair: ω_α = ω_β = w and E = 2w − F(w) = (3w − √(w² − 4))/2
    w = 4.7808
    E, omega_alpha, f = _edge_state(sc1, sc1, w, left=False)
    assert omega_alpha == pytest.approx(w, abs=1e-10)
    assert E == pytest.approx((3.0 * w - math.sqrt(w * w - 4.0)) / 2.0, abs=1e-10)
    assert 0.0 < f < 1.0


@pytest.mark.parametrize("label, mu_a, mu_b", random_jacobi_pairs())
def test_shipped_random_pairs_have_single_crossings(label, mu_a, mu_b):
    assert exterior_scan(mu_a, mu_b) == (1, 1), label


def test_scan_reaches_crossings_near_the_edge():
    # the upper crossing of this pair sits within a few thousandths of supp μ_α
    _, mu_a, mu_b = random_jacobi_pairs()[0]
    support = find_support(mu_a, mu_b)
    assert 0.0 < support.omega_beta_at[1] - mu_a.upper < 1e-2
    assert exterior_scan(mu_a, mu_b, n=60) == (1, 1)


def test_wrong_curvature_rejected(sc1, support_11):
    lower, _ = support_11.points
    with pytest.raises(NonNegativeSecondDerivative):
        edge_coefficients(sc1, sc1, replace(support_11, points=(lower, lower)))


def test_support_of_wider_semicircles():
    a = find_support(make_semicircle(2.0), make_semicircle(2.0))
    assert a.e_minus == pytest.approx(-4.0, abs=1e-8)


def test_support_record(support_11):
    rec = support_to_record(support_11).model_dump()
    assert rec["E_minus"] == support_11.e_minus
    assert rec["gamma"]["beta"] == support_11.gamma_beta
    assert set(rec) == {"E_minus", "E_plus", "omega", "gamma", "edge_residuals"}


def test_edge_slopes_match_wider_semicircle(sc1, sc4):
    # ρ_{σ_5}(x) = √(20 − x²)/(10π) ≈ √(4√5)/(10π)·√s near either edge
    support = find_support(sc1, sc4)
    c = math.sqrt(4.0 * math.sqrt(5.0)) / (10.0 * math.pi)
    assert predicted_edge_slope(sc1, sc4, support) == pytest.approx((c, c), rel=1e-6)
