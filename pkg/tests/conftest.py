import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polyint.geometry import load_body, random_ellipsoid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def ball3():
    return load_body("ball3")


@pytest.fixture(scope="session")
def ball5():
    return load_body("ball5")


@pytest.fixture(scope="session")
def disk():
    return load_body("disk")


@pytest.fixture(scope="session")
def ell149():
    return load_body("ellipsoid149")


@pytest.fixture(scope="session")
def l4():
    return load_body("l4ball3")


@pytest.fixture(scope="session")
def shifted_ball():
    return load_body("shifted-ball3")


@pytest.fixture(scope="session")
def shifted_ell():
    return load_body("shifted-ellipsoid3")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def rand_ell3():
    return random_ellipsoid(3, np.random.default_rng(7))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
