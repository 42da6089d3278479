import numpy as np
import pytest

# Filled by tests/test_acceptance.py; printed once at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}

SEED = 12345


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
