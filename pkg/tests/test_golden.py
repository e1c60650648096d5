"""Committed data files must match what the code generates."""

import json

import pytest

from ambiont.text import parse, serialize, stats
from ambiont.schema import base_schema
from ambiont.worlds import john_world, pendant_world

from conftest import FIXTURES, SCENARIOS, SCHEMA_FILE


@pytest.mark.parametrize("path,build", [
    (SCHEMA_FILE, base_schema),
    (FIXTURES / "john_world.amb", john_world),
    (FIXTURES / "pendant_world.amb", pendant_world),
])
def test_committed_matches_generated(path, build):
    assert path.read_bytes() == serialize(build())


def test_schema_golden_stats():
    assert tuple(stats(parse(SCHEMA_FILE.read_bytes()))) == (112, 4246)


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
def test_scenarios_point_at_fixtures(path):
    world = json.loads(path.read_text())["world"]
    assert (path.parent / world).resolve().is_file()
