import sys
from pathlib import Path

import numpy as np
import pytest

# tests import shared generators as plain modules
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_rows(path, header, rows):
    lines = [",".join(header)] + [",".join(str(x) for x in r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- acceptance report ---------------------------------------------------------------

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


class _Criterion:
    def __init__(self, label):
        self.label = label
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = self.detail if ok or self.detail else f"{exc_type.__name__}: {exc}"
        _ACCEPTANCE[self.label] = (ok, detail)
        return False


@pytest.fixture
def criterion():
    """``with criterion("3 SVD") as c: ...; c.detail = "..."`` records one report line."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0])):
        ok, detail = _ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
