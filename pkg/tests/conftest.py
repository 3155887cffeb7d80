import pytest

from noisecal import linear_beta_schedule


@pytest.fixture(scope="session")
def sched():
    """Default production schedule."""
    return linear_beta_schedule(1000, 1e-4, 0.02)


@pytest.fixture(scope="session")
def tiny_sched():
    """Short schedule for step-level tests."""
    return linear_beta_schedule(10, 0.01, 0.1)
