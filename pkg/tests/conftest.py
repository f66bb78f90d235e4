from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from vmoidx.geometry import get_surface

settings.register_profile("repo", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def disk():
    return get_surface("disk")


@pytest.fixture(scope="session")
def annulus():
    return get_surface("annulus")


@pytest.fixture(scope="session")
def sphere():
    return get_surface("sphere")


@pytest.fixture(scope="session")
def torus():
    return get_surface("torus")
