import numpy as np
import pytest

from plwrithe.samples import lattice_trefoil, smooth_trefoil, unit_square


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def trefoil_lattice():
    return lattice_trefoil()


@pytest.fixture(scope="session")
def trefoil_smooth():
    return smooth_trefoil(200)


@pytest.fixture
def square():
    return unit_square()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
