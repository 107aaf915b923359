import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from opentqd.models import DeutschParams, LZParams

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_density(rng, dim, rank=None):
    rank = rank or dim
    A = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def deutsch():
    return DeutschParams(omega=1.0, gamma0=0.1, tau=10.0)


@pytest.fixture
def lz_sec():
    return LZParams(omega0=1.0, gamma0=0.05, tau=10.0, theta0=np.pi / 3, gamma_mode="sec_theta")


@pytest.fixture
def lz_const():
    return LZParams(omega0=1.0, gamma0=0.05, tau=10.0, theta0=np.pi / 3, gamma_mode="constant")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
