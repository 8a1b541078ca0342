import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data" / "tsplib"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def triangle():
    # the 3-4-5 right triangle
    return np.array([[0.0, 0.0], [0.0, 3.0], [4.0, 0.0]])


def random_points(seed, n, scale=1000.0):
    return np.random.default_rng(seed).uniform(0, scale, (n, 2))


# acceptance results, printed as one line per criterion at the end of the run
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE[number] = (title, bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {title}  [{detail}]")
