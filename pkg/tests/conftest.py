import numpy as np
import pytest

from articsteer.config import RunConfig
from articsteer.simulate import run_case
from articsteer.uncertainty import discretize_at_payload
from articsteer.vehicle import VehicleParams


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def nominal_model(params):
    """Design-payload plant at the default sampling period."""
    return discretize_at_payload(params, params.payload, 0.01)


@pytest.fixture(scope="session")
def run_config():
    return RunConfig()


@pytest.fixture(scope="session")
def case_grid(run_config):
    """All four evaluated cases under both controllers, run once per session."""
    grid = {}
    for case_id in (1, 2, 3, 4):
        for kind in ("rlqr", "hinf"):
            grid[(case_id, kind)] = run_case(case_id, kind, run_config)
    return grid


@pytest.fixture(scope="session")
def rng_factory():
    return np.random.default_rng
