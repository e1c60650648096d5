from pathlib import Path

import pytest

from ambiont.schema import base_schema
from ambiont.worlds import john_world, pendant_world

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
SCENARIOS = ROOT / "scenarios"
SCHEMA_FILE = ROOT / "schema" / "smartcity.amb"

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def schema_kb():
    return base_schema().to_kb()


@pytest.fixture
def john_kb():
    return john_world().to_kb()


@pytest.fixture
def pendant_kb():
    return pendant_world().to_kb()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
