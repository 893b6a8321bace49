import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from liftclust import DataSet, Partition

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def random_hard(rng, n, k):
    """Hard partition of n points into exactly k nonempty clusters."""
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(labels)
    return Partition.from_labels(labels)


def random_soft(rng, n, k):
    A = rng.random((n, k)) + 0.05
    return Partition(A / A.sum(axis=1, keepdims=True))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_ds(rng):
    return DataSet(rng.normal(size=(30, 2)))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
