import pytest

from wiggly import DissipationPotential, KineticRelation, WigglyProfile, two_valued


@pytest.fixture(scope="session")
def quad():
    return DissipationPotential.quadratic(1.0)


@pytest.fixture(scope="session")
def sine():
    return WigglyProfile.sinusoidal(1.0)


@pytest.fixture(scope="session")
def pm1():
    return two_valued(1.0)


@pytest.fixture(scope="session")
def sine_rel(quad, sine):
    return KineticRelation(quad, sine)


@pytest.fixture(scope="session")
def pm1_rel(quad, pm1):
    return KineticRelation(quad, pm1)
