import numpy as np
import pytest

_criteria: dict[int, tuple[str, str]] = {}


def record_criterion(number: int, description: str, passed: bool):
    _criteria[number] = ("PASS" if passed else "FAIL", description)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, desc = _criteria[n]
        terminalreporter.write_line(f"[{status}] criterion {n}: {desc}")
