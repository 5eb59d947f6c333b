import sys
from pathlib import Path

import pytest

from xtdp.field import FieldParams
from xtdp.matrix import MatrixRng
from xtdp.protocol import setup_public

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


@pytest.fixture
def p251():
    return FieldParams(251)


@pytest.fixture
def p7():
    return FieldParams(7)


@pytest.fixture
def setup8(p251):
    return setup_public(MatrixRng(2024), 8, p251)


@pytest.fixture
def setup2(p7):
    return setup_public(MatrixRng(7), 2, p7)


@pytest.fixture
def criterion():
    """Record one acceptance line; the terminal summary prints them all."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
