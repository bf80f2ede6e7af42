import numpy as np
import pytest

# filled by tests/test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def three_sigma(p: float, r: int) -> float:
    return 3 * np.sqrt(p * (1 - p) / r)
