import pytest

from aqmflow import ModelKind, ModelSpec, NetworkParams, PiConfig, simulate


@pytest.fixture(scope="session")
def defaults() -> NetworkParams:
    return NetworkParams()


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # compile the integration kernel once up front so individual tests
    # measure their own work, not jit time
    simulate(
        NetworkParams(),
        ModelSpec(kind=ModelKind.SCENARIO_B),
        PiConfig(),
        duration=0.01,
    )
