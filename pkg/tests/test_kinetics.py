import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiggly.kinetics import (KineticRelation, S_alpha, alpha_of_v, bounds_report,
                             depinning_expansion, fit_power_law, harmonic_mean_K,
                             large_xi_defect, log_depinning)
from wiggly.potentials import DissipationPotential
from wiggly.profiles import WigglyProfile, two_valued

# independent quad values: sinusoid a=1, quadratic mu=1
SINE_R_EFF_1 = math.sqrt(2) - 0.5 * (math.sqrt(2) - math.acosh(math.sqrt(2)))
PM1_R_EFF_1 = 0.25 * (1 + math.sqrt(5)) + math.asinh(0.5)


def test_sinusoid_closed_form(sine_rel):
    xi = np.linspace(1.05, 10, 50)
    assert np.allclose(sine_rel.K(xi), np.sqrt(xi ** 2 - 1), rtol=1e-10)
    assert np.allclose(sine_rel.K(-xi), -np.sqrt(xi ** 2 - 1), rtol=1e-10)


def test_two_valued_closed_form(pm1_rel):
    xi = np.linspace(1.01, 5, 40)
    assert np.allclose(pm1_rel.K(xi), xi - 1 / xi, rtol=1e-12)
    assert np.allclose(pm1_rel.R_eff_star(xi), 0.5 * (xi ** 2 - 1) - np.log(xi), rtol=1e-8)


def test_R_eff_frozen_values(sine_rel, pm1_rel):
    assert float(sine_rel.R_eff(1.0)) == pytest.approx(SINE_R_EFF_1, rel=1e-8)
    assert float(pm1_rel.R_eff(1.0)) == pytest.approx(PM1_R_EFF_1, rel=1e-8)


def test_sticking_interval(sine_rel):
    assert sine_rel.sticking_interval == (-1.0, 1.0)
    assert np.all(sine_rel.K(np.linspace(-1, 1, 41)) == 0.0)
    assert np.all(sine_rel.R_eff_star(np.linspace(-1, 1, 41)) == 0.0)


def test_subdifferential_at_rest(sine_rel):
    lo, hi = sine_rel.subdiff_R_eff(0.0)
    assert (lo, hi) == (-1.0, 1.0)


def test_dR_eff_inverts_K(sine_rel):
    v = np.linspace(0.1, 4, 12)
    assert np.allclose(sine_rel.K(sine_rel.dR_eff(v)), v, rtol=1e-9)


def test_zero_profile_is_identity(quad):
    rel = KineticRelation(quad, WigglyProfile.zero())
    xi = np.linspace(-3, 3, 13)
    assert np.allclose(rel.K(xi), xi)
    assert np.allclose(rel.R_eff(xi), quad.R(xi))


def test_harmonic_mean_scales_with_mobility():
    prof = WigglyProfile.sinusoidal(2.0)
    for mu in (0.5, 2.0):
        xi = np.linspace(2.1, 20, 10)
        k = harmonic_mean_K(DissipationPotential.from_mobility(mu), prof, xi)
        assert np.allclose(k, mu * np.sqrt(xi ** 2 - 4), rtol=1e-9)


def test_S_alpha_two_is_pi():
    assert S_alpha(2.0) == pytest.approx(math.pi, abs=1e-12)
    with pytest.raises(ValueError):
        S_alpha(1.0)


def test_depinning_prediction_sinusoid(sine_rel):
    pred = depinning_expansion(sine_rel, 1.0 + 1e-6)
    assert pred.exponent == 0.5
    assert pred.prefactor == pytest.approx(math.sqrt(2 * math.pi ** 2) / math.pi)
    assert float(sine_rel.K(1 + 1e-6)) == pytest.approx(pred.K, rel=1e-3)


def test_log_depinning_tent(quad):
    rel = KineticRelation(quad, WigglyProfile.tent(1.0))
    d = 1e-8
    ratio = float(rel.K(1 + d)) / log_depinning(rel, 1 + d)
    assert ratio == pytest.approx(1.0, abs=0.15)


def test_large_force_defect_vanishes(sine_rel):
    d = np.abs(large_xi_defect(sine_rel, np.array([10.0, 100.0, 1000.0])))
    assert d[0] > d[1] > d[2] and d[2] < 1e-3


def test_fit_power_law_exact():
    x = np.logspace(-3, 0, 9)
    assert fit_power_law(x, 3 * x ** 0.7) == pytest.approx((0.7, 3.0))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_bounds(p):
    rel = KineticRelation(DissipationPotential.power_law(1 / p, p), WigglyProfile.sinusoidal(1.0))
    rep = bounds_report(rel, np.linspace(0, 4, 21), np.linspace(1, 5, 21))
    assert rep["ok"], rep["margins"]


def test_alpha_of_v_below_two(sine_rel):
    a = alpha_of_v(sine_rel, np.array([0.5, 1.0, 2.0]))
    assert np.all(a > 1) and np.all(a < 2)
    assert alpha_of_v(sine_rel, 0.0) == 1.0


def test_sample_shapes(sine_rel):
    s = sine_rel.sample(np.linspace(-2, 2, 5), np.linspace(0, 2, 4))
    assert s["K"].shape == (5,) and s["R_eff"].shape == (4,)


def test_discrete_K_interval(pm1_rel):
    lo, hi = pm1_rel.K_interval(1.0)
    assert lo == 0.0 and hi >= 0.0


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-8, 8), b=st.floats(-8, 8))
def test_K_odd_and_monotone(sine_rel, a, b):
    ka, kb = float(sine_rel.K(a)), float(sine_rel.K(b))
    assert float(sine_rel.K(-a)) == pytest.approx(-ka, abs=1e-12)
    if a <= b:
        assert ka <= kb + 1e-12


@settings(max_examples=40, deadline=None)
@given(v=st.floats(0.0, 6.0), xi=st.floats(-6, 6))
def test_effective_young_fenchel(pm1_rel, v, xi):
    gap = float(pm1_rel.R_eff(v)) + float(pm1_rel.R_eff_star(xi)) - v * xi
    assert gap >= -1e-8 * (1 + abs(v * xi))
