import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one acceptance line; the terminal summary prints them all.

    ``ok=None`` records an informational line that does not gate anything.
    """
    def record(number: int, title: str, ok, detail: str = ""):
        ACCEPTANCE.append((number, title, ok, detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE, key=lambda r: (r[0], r[2] is None)):
        tag = "INFO" if ok is None else "PASS" if ok else "FAIL"
        line = f"[{tag}] {number:2d}. {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
