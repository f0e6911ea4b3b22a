import json
from pathlib import Path

import pytest

from lamptf.bvp import solve_bvp

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "docs" / "schema"

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def tf_solution():
    """Default-settings solution of the p = 1 boundary-value problem."""
    return solve_bvp(1)


@pytest.fixture(scope="session")
def schema():
    def load(name):
        return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())

    return load


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def record(item, passed, detail):
        line = f"acceptance {item:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append((item, line))
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(line)
