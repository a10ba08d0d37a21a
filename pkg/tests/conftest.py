import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import proflim as pl

settings.register_profile(
    "suite", deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

FIXTURE_DIR = __file__.rsplit("/", 1)[0] + "/fixtures"


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, label): prints a pass/fail banner line for the "
        "acceptance criterion the test implements")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None and rep.when == "call":
        num, label = mark.args
        status = "PASS" if rep.passed else "FAIL"
        tw = item.config.get_terminal_writer()
        tw.line("")
        tw.line(f"[{status}] criterion {num}: {label}")


@pytest.fixture(scope="session")
def euclid():
    return pl.euclid_tower(10)


@pytest.fixture(scope="session")
def poly():
    return pl.poly_tower(10)


@pytest.fixture(scope="session")
def matrix():
    return pl.matrix_tower(8)


@pytest.fixture(scope="session")
def cross():
    return pl.cross_family()


@pytest.fixture(scope="session")
def wiener():
    return pl.wiener_family()


@pytest.fixture(scope="session")
def symplectic():
    return pl.symplectic_even_tower(5)


@pytest.fixture(scope="session")
def odd_tower():
    return pl.odd_symplectic_tower(5)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)
