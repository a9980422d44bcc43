from __future__ import annotations

from pathlib import Path

import pytest

from ptyterm import stdlib
from ptyterm.derivation import load

DATA = Path(__file__).parent / "data"

# (number, title, passed, detail) for the acceptance summary
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(ACCEPTANCE):
        line = f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def golden():
    def read(name: str, mode: str = "cbv"):
        return load(str(DATA / f"{name}.deriv"), mode)
    return read


@pytest.fixture
def named():
    def get(name: str, mode: str = "cbv"):
        return stdlib.lookup(name).term(mode)
    return get
