import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiggly.contact import (M1_expansion, M_cell_direct, M_density, M_lagrange, M_partials,
                            M_rate_independent, M_weak, M_zero, WFunction, bipotential_check,
                            contact_residual, convexity_probe, multiplier_surface,
                            expansion_remainder, meff_comparison, solve_H)
from wiggly.kinetics import KineticRelation
from wiggly.potentials import DissipationPotential, concave_window_dual
from wiggly.profiles import WigglyProfile, two_valued

# M(v, xi) for quadratic nu = 1 and the unit sinusoid, from an independent
# scipy quad + brentq solve of the multiplier equation
FROZEN_M = [
    (1.0, 0.0, 0.7345526199454773),
    (1.0, 2.0, 2.1414456908563246),
    (2.0, 0.5, 2.3568785143999205),
    (0.5, 1.5, 0.8062924443970483),
    (3.0, -1.0, 5.221665358392187),
]


@pytest.fixture(scope="module")
def wf(quad, sine):
    return WFunction(quad, sine)


@pytest.mark.parametrize("v,xi,expected", FROZEN_M)
def test_lagrange_frozen_values(quad, sine, wf, v, xi, expected):
    ev = M_lagrange(quad, sine, v, xi, wf=wf)
    assert ev.M == pytest.approx(expected, rel=1e-10)
    assert ev.residual < 1e-10


@pytest.mark.parametrize("v,xi,expected", FROZEN_M)
def test_density_frozen_values(quad, sine, v, xi, expected):
    assert M_density(quad, sine, v, xi).M == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("v,xi,expected", FROZEN_M[:3])
def test_cell_frozen_values(quad, sine, v, xi, expected):
    assert M_cell_direct(quad, sine, v, xi).M == pytest.approx(expected, rel=1e-4)


def test_cell_route_refuses_discrete(quad, pm1):
    with pytest.raises(ValueError):
        M_cell_direct(quad, pm1, 1.0, 0.0)


def test_M_zero_sticking(quad, sine):
    xi = np.linspace(-1, 1, 21)
    assert np.all(M_zero(quad, sine, xi) == 0.0)
    assert M_zero(quad, sine, 3.0) == pytest.approx(2.0)


def test_zero_velocity_is_M_zero(quad, sine):
    assert M_lagrange(quad, sine, 0.0, 2.0).M == pytest.approx(0.5)


def test_M1_at_zero_and_half(quad, sine, wf):
    assert M1_expansion(quad, sine, 0.0, wf=wf) == pytest.approx(2 / math.pi, rel=1e-10)
    assert M1_expansion(quad, sine, 0.5, wf=wf) == pytest.approx(0.7179955620884586, rel=1e-10)


def test_expansion_remainder_shrinks(quad, sine, wf):
    for xi in (0.5, 1.0):
        e = [expansion_remainder(quad, sine, v, xi, wf=wf) for v in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert all(b <= 0.75 * a for a, b in zip(e[:-1], e[1:]))


def test_rate_independent_limit(quad, sine):
    rep = M_rate_independent(quad, sine, 1.0, 0.5)
    assert rep["inside"] and rep["ok"]
    out = M_rate_independent(quad, sine, 1.0, 2.0)
    assert not out["inside"] and out["ok"]


def test_saturation_at_large_force(quad, sine, wf):
    g, sat = solve_H(wf, 1e-3, 3.0)
    assert sat and g == 0.0


def test_concave_window_closed_form():
    pot, prof = concave_window_dual(), two_valued(2.0)
    wf = WFunction(pot, prof)
    for v in np.linspace(32 / 14, 3.2, 4):
        for xi in (-1.0, 0.0, 0.7):
            ev = M_lagrange(pot, prof, v, xi, wf=wf)
            assert ev.M == pytest.approx(16 / v - 18 + v * (7 - xi * xi / 16), rel=1e-10)
            assert ev.h == pytest.approx(32 / v - 18, rel=1e-10)


def test_concave_window_concave_in_force():
    pot, prof = concave_window_dual(), two_valued(2.0)
    wf = WFunction(pot, prof)
    rep = convexity_probe(lambda v, xi: M_lagrange(pot, prof, v, xi, wf=wf).M, "xi",
                          [3.0], [-0.5, 0.0, 0.5], 0.5)
    assert rep["worst"] == pytest.approx(-3.0 * 0.5 ** 2 / 16, rel=1e-8)


def test_discrete_routes_agree(quad, pm1):
    for v, xi in [(0.5, 0.0), (1.0, 0.5), (2.0, 1.5), (0.3, 2.0)]:
        a = M_lagrange(quad, pm1, v, xi).M
        b = M_density(quad, pm1, v, xi).M
        assert a == pytest.approx(b, rel=1e-7, abs=1e-9)


def test_weak_counterexample(quad, pm1):
    m = M_weak(quad, pm1, 0.5, 0.5).M
    assert m == pytest.approx(0.15327, abs=1e-4)
    assert m < 0.25


def test_partials_match_differences(quad, sine, wf):
    v, xi, h = 1.3, 0.4, 1e-5
    M, dv, dxi = M_partials(quad, sine, v, xi, wf=wf)
    f = lambda a, b: M_lagrange(quad, sine, a, b, wf=wf).M
    assert dv == pytest.approx((f(v + h, xi) - f(v - h, xi)) / (2 * h), rel=1e-6)
    assert dxi == pytest.approx((f(v, xi + h) - f(v, xi - h)) / (2 * h), rel=1e-6)


def test_contact_residual_on_graph(sine_rel, wf):
    for v in (0.1, 1.0, 4.0):
        assert abs(contact_residual(sine_rel, v, wf=wf)) < 1e-9


def test_bipotential_equivalence(quad, sine, sine_rel):
    v = np.linspace(0.2, 3, 5)
    on = [(x, float(sine_rel.dR_eff(x))) for x in v] + [(0.0, 0.3)]
    off = [(x, float(sine_rel.dR_eff(x)) + 0.5) for x in v]
    assert bipotential_check(quad, sine, on + off)["consistent"]


def test_meff_dominates_on_multiplier_surface(pm1_rel):
    rows = multiplier_surface(pm1_rel, np.linspace(1.05, 3, 6), np.linspace(-4, -0.01, 6))
    assert rows and min(r["diff"] for r in rows) > -1e-8
    assert min(r["gap"] for r in rows) >= -1e-9


def test_meff_comparison_contact_rows(sine_rel):
    pts = [(1.0, float(sine_rel.dR_eff(1.0))), (1.0, 0.0)]
    rep = meff_comparison(sine_rel, pts)
    assert rep["rows"][0]["contact"] and rep["max_contact_diff"] < 1e-7


@settings(max_examples=40, deadline=None)
@given(v=st.floats(-4, 4), xi=st.floats(-4, 4))
def test_lower_bounds_and_symmetry(quad, sine, wf, v, xi):
    m = M_lagrange(quad, sine, v, xi, wf=wf).M
    assert m - v * xi >= -1e-9 * (1 + abs(v * xi))
    assert m - M_zero(quad, sine, xi) >= -1e-9
    assert M_lagrange(quad, sine, -v, xi, wf=wf).M == pytest.approx(m, rel=1e-12, abs=1e-14)
    assert M_lagrange(quad, sine, v, -xi, wf=wf).M == pytest.approx(m, rel=1e-9, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(v=st.floats(0.05, 4), xi=st.floats(-4, 4))
def test_discrete_lower_bounds(quad, pm1, v, xi):
    m = M_lagrange(quad, pm1, v, xi).M
    assert m - v * xi >= -1e-9 * (1 + abs(v * xi))
    assert m - M_zero(quad, pm1, xi) >= -1e-9
