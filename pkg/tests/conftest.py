import numpy as np
import pytest

from satctl.controllers import build_config

ACCEPTANCE_LINES = []


@pytest.fixture
def opt1():
    return build_config(1)


@pytest.fixture
def opt1_zero():
    return build_config(1, zero_rho=True)


@pytest.fixture
def opt2():
    return build_config(2, beta=0.5)


def grid(n, lo=-10.0, hi=10.0):
    ax = np.linspace(lo, hi, n)
    return np.meshgrid(ax, ax, indexing="ij")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)
