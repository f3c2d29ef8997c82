import pytest

from vanhove.grid import build_grid

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small_grid():
    """Cheap axisymmetric grid for z-axis scenarios."""
    return build_grid(0.0, 8.0, 40, 8, azimuth_count=2)


@pytest.fixture(scope="session")
def full_angle_grid():
    return build_grid(0.0, 8.0, 32, 8)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
