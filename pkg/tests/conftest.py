import pytest

from minsurf_index.geometry import plane_grid, solve_profile


@pytest.fixture(scope="session")
def cat4():
    """Production-resolution 4-dimensional catenoid (h = 0.002)."""
    return solve_profile(4, 1.0, 80.0, 40000)


@pytest.fixture(scope="session")
def cat4_small():
    return solve_profile(4, 1.0, 20.0, 2000)


@pytest.fixture(scope="session")
def cat5_small():
    return solve_profile(5, 1.0, 20.0, 2000)


@pytest.fixture(scope="session")
def plane4():
    return plane_grid(4, 40.0, 4000)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
