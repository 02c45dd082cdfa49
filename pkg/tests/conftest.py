import pytest

from ewbubbles.nucleation import SimConfig
from ewbubbles.physics import PotentialParams, TransitionWindow, critical_temperature


@pytest.fixture(scope="session")
def params():
    return PotentialParams.standard_model()


@pytest.fixture(scope="session")
def window(params):
    return TransitionWindow(critical_temperature(params))


@pytest.fixture(scope="session")
def sim_cfg():
    return SimConfig()
