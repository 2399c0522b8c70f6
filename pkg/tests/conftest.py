import math

import pytest

ACCEPTANCE_LINES = []


def regime(alpha: float, R: float = 1.0) -> float:
    """Intensity of the constant-radius vacant model with alpha = 2 lam sinh R."""
    return alpha / (2.0 * math.sinh(R))


def report(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def accept():
    return report
