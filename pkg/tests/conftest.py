import numpy as np
import pytest

from pux2d import BoundaryCurve, Domain, build_panels
from pux2d.config import builtin_config

DISC_CENTER = complex(17.0 / 701.0, 5.0 / 439.0)

# pass/fail lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    del exitstatus, config
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_circle():
    return BoundaryCurve(c0=1.0)


@pytest.fixture(scope="session")
def disc_domain():
    return Domain(outer=BoundaryCurve(c0=1.0, offset=DISC_CENTER))


@pytest.fixture(scope="session")
def example2_domain():
    return builtin_config(2).domain()


@pytest.fixture(scope="session")
def example3_domain():
    return builtin_config(3).domain()


@pytest.fixture(scope="session")
def disc_panels(disc_domain):
    return [build_panels(disc_domain.outer, 32)]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
