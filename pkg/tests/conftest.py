import numpy as np
import pytest

from saginmc.sim.channel import LinkKind, LinkMetrics
from saginmc.sim.env import EnvConfig, SaginEnv


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch):
    monkeypatch.setenv("SAGINMC_DISABLE_PROGRESS", "1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def env():
    return SaginEnv(EnvConfig())


@pytest.fixture
def frozen_env():
    return SaginEnv(EnvConfig(frozen=True))


def make_metrics(capacities, latencies, powers=(2.0, 3.0, 4.0, 5.0), snrs=(0.0, 0.0, 0.0, 0.0), loads=(0.0,) * 4):
    """Metrics map with one entry per link kind, in LinkKind order."""
    return {
        kind: LinkMetrics(
            los=True,
            path_loss=100.0,
            snr=float(snrs[kind]),
            capacity=float(capacities[kind]),
            latency=float(latencies[kind]),
            power=float(powers[kind]),
            load=float(loads[kind]),
        )
        for kind in LinkKind
    }


@pytest.fixture
def metrics_factory():
    return make_metrics
