import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiggly.profiles import WigglyProfile, two_valued

PROFILES = [
    WigglyProfile.sinusoidal(1.0),
    WigglyProfile.sinusoidal(0.5),
    WigglyProfile.tent(1.0),
    WigglyProfile.peaked(1.0, 2.0),
    WigglyProfile.peaked(1.0, 0.5),
    WigglyProfile.tabulated([0.0, 1.0, 0.5, -0.7, -0.4]),
]


@pytest.mark.parametrize("prof", PROFILES, ids=lambda p: p.kind)
def test_mean_zero(prof):
    assert abs(prof.mean()) < 1e-9


@pytest.mark.parametrize("prof", PROFILES, ids=lambda p: p.kind)
def test_extremes_attained(prof):
    y = np.linspace(0, 1, 20001)
    p = np.asarray(prof.p(y))
    assert p.max() <= prof.p_max + 1e-12
    assert p.min() >= prof.p_min - 1e-12
    assert float(prof.p(prof.z_star)) == pytest.approx(prof.p_max, abs=1e-12)


@pytest.mark.parametrize("prof", PROFILES, ids=lambda p: p.kind)
def test_gap_and_rise_consistent(prof):
    y = np.linspace(0.0, 1.0, 997, endpoint=False)
    p = np.asarray(prof.p(y))
    assert np.allclose(prof.gap_from_max(y), prof.p_max - p, atol=1e-7)
    assert np.allclose(prof.rise_from_min(y), p - prof.p_min, atol=1e-7)


@pytest.mark.parametrize("prof", PROFILES[:4], ids=lambda p: p.kind)
def test_antiderivative_differentiates_to_profile(prof):
    y = np.linspace(0.05, 0.95, 7)
    h = 1e-6
    d = (prof.antiderivative(y + h) - prof.antiderivative(y - h)) / (2 * h)
    assert np.allclose(d, prof.p(y), atol=1e-6)


def test_sinusoid_derivatives():
    prof = WigglyProfile.sinusoidal(1.0)
    y = np.linspace(0, 1, 11)
    assert np.allclose(prof.dp(y), 2 * math.pi * np.cos(2 * math.pi * y))
    assert np.allclose(prof.d2p(y), -4 * math.pi ** 2 * np.sin(2 * math.pi * y))


def test_rule_integrates_profile_functions():
    prof = WigglyProfile.sinusoidal(1.0)
    r = prof.rule(level=0.3)
    assert r.integrate(np.abs(0.3 - r.p)) == pytest.approx(
        2 / math.pi * (math.sqrt(1 - 0.09) + 0.3 * math.asin(0.3)), rel=1e-12)


def test_level_crossings_sinusoid():
    prof = WigglyProfile.sinusoidal(1.0)
    c = prof.level_crossings(0.5)
    assert np.allclose(sorted(c), [1 / 12, 5 / 12], atol=1e-13)


def test_two_valued_is_discrete():
    prof = two_valued(1.5)
    assert prof.is_discrete
    assert prof.p_max == 1.5 and prof.p_min == -1.5
    r = prof.rule()
    assert r.integrate(r.p) == pytest.approx(0.0)


def test_tabulated_shifted_to_zero_mean():
    prof = WigglyProfile.tabulated([1.0, 2.0, 3.0])
    assert abs(prof.mean()) < 1e-12


def test_c_star_sinusoid():
    prof = WigglyProfile.sinusoidal(0.5)
    assert prof.c_star == pytest.approx(2 * math.pi ** 2 * 0.5)
    assert prof.alpha == 2


def test_profile_roundtrip():
    for prof in PROFILES + [two_valued(1.0), WigglyProfile.zero()]:
        again = WigglyProfile.from_dict(prof.to_dict())
        y = np.linspace(0, 1, 9)
        assert np.allclose(again.p(y), prof.p(y))


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        WigglyProfile.from_dict({"kind": "square"})


@settings(max_examples=50, deadline=None)
@given(y=st.floats(-3, 3), k=st.integers(-3, 3))
def test_periodicity(y, k):
    for prof in PROFILES[:4]:
        assert float(prof.p(y + k)) == pytest.approx(float(prof.p(y)), abs=1e-9)
