import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiggly.potentials import (DissipationPotential, DualPiece, PsiTransform,
                               concave_window_dual, convex_envelope, legendre_transform,
                               same_flow_check, young_fenchel_gap)

POWERS = [1.5, 2.0, 3.0]


def test_quadratic_values(quad):
    assert quad.R(2.0) == pytest.approx(2.0)
    assert quad.R_star(3.0) == pytest.approx(4.5)
    assert quad.dR_star(-1.5) == pytest.approx(-1.5)
    assert quad.psi_star(-2.0) == pytest.approx(-2.0)


def test_mobility_constructor_matches_dual_slope():
    pot = DissipationPotential.from_mobility(2.0)
    assert pot.dR_star(3.0) == pytest.approx(6.0)
    assert pot.R(1.0) == pytest.approx(0.25)


@pytest.mark.parametrize("p", POWERS)
def test_power_law_conjugacy_on_graph(p):
    pot = DissipationPotential.power_law(1.0 / p, p)
    v = np.linspace(0.1, 4.0, 25)
    xi = pot.dR(v)
    assert np.allclose(young_fenchel_gap(pot, v, xi), 0.0, atol=1e-12)
    assert np.allclose(pot.dR_star(xi), v, rtol=1e-12)


def test_concave_window_dual_pieces():
    pot = concave_window_dual()
    assert pot.R_star(0.5) == pytest.approx(0.25)
    assert pot.R_star(2.0) == pytest.approx(3.0)
    assert pot.R_star(5.0) == pytest.approx(21 - 8 * math.sqrt(2))
    assert pot.R(2.0) == pytest.approx(1.0)
    # continuation beyond the last table entry is C^2
    for x in (6.0,):
        lo, hi = x - 1e-7, x + 1e-7
        assert pot.R_star(lo) == pytest.approx(pot.R_star(hi), abs=1e-6)
        assert pot.dR_star(lo) == pytest.approx(pot.dR_star(hi), abs=1e-6)
        assert pot.d2R_star(lo) == pytest.approx(pot.d2R_star(hi), abs=1e-5)


def test_concave_window_psi_star_closed_form():
    pot = concave_window_dual()
    for s in (-5.0, -6.5, -8.0):
        assert pot.psi_star(s) == pytest.approx((s * s + 42 * s - 7) / 64, rel=1e-12)
    assert pot.psi_star(-3.0) == pytest.approx(-2.0)


def test_tabulated_dual_requires_infinite_last_piece():
    with pytest.raises(ValueError):
        DissipationPotential.tabulated_dual([DualPiece("poly2", (0.0, 0.0, 1.0), 1.0)],
                                            extend=False)


def test_roundtrip_dict():
    for pot in (DissipationPotential.quadratic(2.0), DissipationPotential.power_law(0.5, 3.0),
                concave_window_dual()):
        again = DissipationPotential.from_dict(pot.to_dict())
        x = np.linspace(-4, 4, 17)
        assert np.allclose(again.R_star(x), pot.R_star(x))


@pytest.mark.parametrize("p", POWERS)
def test_psi_star_matches_brute_force(p):
    pot = DissipationPotential.power_law(1.0 / p, p)
    tr = PsiTransform(pot)
    for s in (-0.3, -1.0, -2.5):
        assert tr.psi_star(s) == pytest.approx(tr.brute_force_psi_star(s), rel=1e-8, abs=1e-10)


def test_psi_star_positive_sigma_rejected(quad):
    with pytest.raises(ValueError):
        PsiTransform(quad).psi_star(0.5)


@pytest.mark.parametrize("p", POWERS)
def test_R_star_inverse_and_taylor_remainder(p):
    pot = DissipationPotential.power_law(1.0 / p, p)
    t = np.logspace(-12, 2, 30)
    assert np.allclose(pot.R_star(pot.R_star_inverse(t)), t, rtol=1e-12)
    g = 1e-2
    naive = (pot.R_star_inverse(t + g) - pot.R_star_inverse(t)
             - g / pot.dR_star(pot.R_star_inverse(t + g)))
    stable = pot.R_star_inverse_taylor(t, g)
    big = t > 1e-1
    # the naive difference loses about eps_machine * Psi(t + g) to cancellation
    slack = 1e-14 * pot.R_star_inverse(t + g)
    assert np.all(np.abs(stable - naive)[big] <= 1e-9 * stable[big] + slack[big])
    assert np.all(stable >= 0)


def test_R_star_increment_without_cancellation():
    pot = DissipationPotential.power_law(1 / 3, 3.0)
    base, inc = 5.0, 1e-12
    exact = pot.dR_star(base) * inc
    assert pot.R_star_increment(base, inc) == pytest.approx(exact, rel=1e-9)


def test_legendre_transform_of_half_square():
    x = np.linspace(-3, 3, 6001)
    _, fs = legendre_transform(x, 0.5 * x * x, xi=[1.0, -0.5, 2.0])
    assert np.allclose(fs, [0.5, 0.125, 2.0], atol=1e-6)


def test_convex_envelope_drops_concave_points():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    hx, hf = convex_envelope(x, np.array([0.0, 2.0, 1.0, 3.0]))
    assert list(hx) == [0.0, 2.0, 3.0]


def test_same_flow_structures_agree():
    assert same_flow_check()["max_defect"] < 1e-12


@settings(max_examples=60, deadline=None)
@given(v=st.floats(-20, 20), xi=st.floats(-20, 20), p=st.sampled_from(POWERS))
def test_young_fenchel_inequality(v, xi, p):
    pot = DissipationPotential.power_law(1.0 / p, p)
    assert young_fenchel_gap(pot, v, xi) >= -1e-9 * (1 + abs(v * xi))


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(-15, 15))
def test_concave_window_young_fenchel(xi):
    pot = concave_window_dual()
    v = float(pot.dR_star(xi))
    assert young_fenchel_gap(pot, v, xi) == pytest.approx(0.0, abs=1e-9 * (1 + abs(v * xi)))
