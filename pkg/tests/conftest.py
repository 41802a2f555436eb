import pytest
from hypothesis import HealthCheck, settings

from ddprony import GridConfig, SignalModelKind, transmit_samples

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def cfg():
    return GridConfig(32, 32)


@pytest.fixture(scope="session")
def tx_ideal(cfg):
    return transmit_samples(cfg, SignalModelKind.IDEAL_PERIODIC)


@pytest.fixture(scope="session")
def tx_sinc(cfg):
    return transmit_samples(cfg, SignalModelKind.TRUNCATED_SINC)
