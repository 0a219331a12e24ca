import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gwbec import Grid, UnitSystem

# numerics-heavy properties: no deadline, moderate example counts
settings.register_profile(
    "numerics",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numerics")


@pytest.fixture
def units():
    return UnitSystem.natural()


@pytest.fixture
def grid16():
    return Grid(extents=(8.0, 8.0), points=(16, 16))


@pytest.fixture
def grid32():
    return Grid(extents=(16.0, 16.0), points=(32, 32))


@pytest.fixture
def grid64():
    return Grid(extents=(16.0, 16.0), points=(64, 64))


@pytest.fixture(autouse=True)
def _deterministic_numpy():
    # tests draw their own Philox generators; the global state stays untouched,
    # this just guards against accidental np.random.* use sneaking in
    state = np.random.get_state()
    yield
    np.random.set_state(state)
