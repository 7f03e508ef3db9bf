import numpy as np
import pytest

from antiholo.manifold import catalog_manifold


@pytest.fixture(scope="session")
def flat3():
    return catalog_manifold("flat", [3])


@pytest.fixture(scope="session")
def fs34():
    return catalog_manifold("fubini_study", [3, 4])


@pytest.fixture(scope="session")
def hopf3():
    return catalog_manifold("hopf", [3])


@pytest.fixture(scope="session")
def twisted():
    return catalog_manifold("twisted_j", [3, 0.1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


E1 = np.array([1.0, 0, 0, 0, 0, 0])
PROBE = np.array([0.3, -0.2, 0.1, 0.5, 0.2, -0.4])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
