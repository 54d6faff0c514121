import numpy as np
import pytest

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def criterion():
    """Record one acceptance outcome; the line is printed now and in the summary."""
    def record(number, title, ok, detail):
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
        _CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-scale acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
