import re
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line: report(number, passed, detail)."""
    def record(number, passed, detail):
        line = f"ACCEPTANCE {number:>3}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(re.match(r"ACCEPTANCE\s+(\d+)", s).group(1))):
            terminalreporter.write_line(line)


@pytest.fixture
def suicide():
    return np.loadtxt(DATA / "suicide.csv", skiprows=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
