import math

import pytest
from hypothesis import HealthCheck, settings

from hypthick.spectral import TruncatedCusp, solve_modes

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def basis():
    """Default truncated cusp a = 1, Y = e^pi with 30 modes (n = 800, k_max = 8)."""
    return solve_modes(TruncatedCusp(1.0, math.exp(math.pi), 800, 8), 30)


@pytest.fixture(scope="session")
def small_basis():
    return solve_modes(TruncatedCusp(1.0, math.exp(math.pi), 300, 6), 24)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
