import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numba compiles on first use; keep hypothesis from timing that
settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_acceptance(number: int, ok: bool, text: str) -> None:
    ACCEPTANCE_LINES.append((number, f"{'PASS' if ok else 'FAIL'} [{number}] {text}"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
