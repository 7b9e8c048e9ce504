import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parent.parent
PAPER_CFG = ROOT / "paper.cfg"


@pytest.fixture
def paper_cfg_path():
    return PAPER_CFG


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(id, ok, detail)`` then assert ``ok``."""

    def record(cid, ok, detail):
        _CRITERIA.append((cid, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}  {detail}")
