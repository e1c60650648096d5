import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ambiont.composition import (
    CompositeSpec,
    NoCover,
    NotComposite,
    decompose,
    recompose,
    spec_from_json,
)
from ambiont.context import ContextPattern, DeviceKind, LocationRecord, matches
from ambiont.kb import instance, rel
from ambiont.schema import CyclicComposition, base_schema, effective_view
from ambiont.vocab import SC

from conftest import FIXTURES
from oracles import FakeDevice, cover_oracle, device_axioms, random_devices, random_requirements

A = DeviceKind.ACTUATOR
S = DeviceKind.SENSOR
BEDROOM = ContextPattern(location=LocationRecord(building="Maison de John", room="Bedroom"))
VIRTUAL_TV = CompositeSpec("VirtualTV", frozenset({(SC.Display, A), (SC.Audio, A)}), BEDROOM)


def fake_kb(devices):
    kb = base_schema().to_kb()
    for ax in device_axioms(devices):
        kb.add_axiom(ax)
    return kb


def fake_spec(required, room):
    pattern = ContextPattern(location=LocationRecord(building="H", room=room)) if room else ContextPattern()
    return CompositeSpec("x", frozenset((SC(c), DeviceKind(k)) for c, k in required), pattern)


def check_against_oracle(devices, required, room):
    kb = fake_kb(devices)
    spec = fake_spec(required, room)
    want = cover_oracle(devices, required, room)
    if want is None:
        with pytest.raises(NoCover):
            recompose(kb, spec)
        return
    vc = recompose(kb, spec)
    assert (len(vc.devices), tuple(d.local for d in vc.devices)) == want
    by_name = {d.name: d for d in devices}
    for (cap, kind), dev in vc.assignment.items():
        d = by_name[dev.local]
        assert d.functioning and cap.local in d.caps and d.kind.lower() == kind.value
        assert matches(spec.colocate, effective_view(kb, dev).context)


class TestDecompose:
    def test_tv(self, john_kb):
        assert decompose(john_kb, SC.tv1) == [SC.screen1, SC.speaker1]

    def test_phone(self, john_kb):
        assert decompose(john_kb, SC.phone1) == [SC.accelP, SC.screenP, SC.speakerP, SC.touchP]

    def test_not_composite(self, john_kb):
        with pytest.raises(NotComposite):
            decompose(john_kb, SC.screen1)

    def test_nested(self, schema_kb):
        for ax in [instance(SC.c, SC.Sensor), instance(SC.B, SC.CompositeHardware),
                   instance(SC.A, SC.CompositeHardware), rel(SC.B, SC.hasComponent, SC.c),
                   rel(SC.A, SC.hasComponent, SC.B)]:
            schema_kb.add_axiom(ax)
        assert decompose(schema_kb, SC.A) == [SC.B, SC.c]

    def test_cycle(self, schema_kb):
        for ax in [instance(SC.a, SC.CompositeHardware), instance(SC.b, SC.CompositeHardware),
                   rel(SC.a, SC.hasComponent, SC.b), rel(SC.b, SC.hasComponent, SC.a)]:
            schema_kb.add_axiom(ax)
        with pytest.raises(CyclicComposition):
            decompose(schema_kb, SC.a)


class TestRecompose:
    def test_virtual_tv(self, john_kb):
        vc = recompose(john_kb, VIRTUAL_TV)
        assert vc.assignment == {(SC.Display, A): SC.screen2, (SC.Audio, A): SC.speaker2}

    def test_tv_components_used_once_tv_repaired(self, john_kb):
        john_kb.replace_values(SC.tv1, SC.isFunctioning, [True])
        vc = recompose(john_kb, VIRTUAL_TV)
        assert vc.devices == (SC.screen1, SC.speaker1)

    def test_no_speaker(self, john_kb):
        john_kb.replace_values(SC.speaker2, SC.isFunctioning, [False])
        with pytest.raises(NoCover) as exc:
            recompose(john_kb, VIRTUAL_TV)
        assert exc.value.missing == {(SC.Audio, A)}

    def test_single_display(self):
        devices = [FakeDevice("d0", "Actuator", frozenset({"Display"}), "Bedroom")]
        vc = recompose(fake_kb(devices), fake_spec({("Display", "actuator")}, "Bedroom"))
        assert vc.assignment == {(SC.Display, A): SC.d0}

    def test_multi_capability_preferred(self):
        devices = [
            FakeDevice("a_screen", "Actuator", frozenset({"Display"}), "Bedroom"),
            FakeDevice("b_speaker", "Actuator", frozenset({"Audio"}), "Bedroom"),
            FakeDevice("z_phone", "Actuator", frozenset({"Display", "Audio"}), "Bedroom"),
        ]
        vc = recompose(fake_kb(devices), fake_spec({("Display", "actuator"), ("Audio", "actuator")}, "Bedroom"))
        assert vc.devices == (SC.z_phone,)

    def test_kind_matters(self):
        devices = [FakeDevice("d0", "Sensor", frozenset({"Display"}), None)]
        with pytest.raises(NoCover):
            recompose(fake_kb(devices), fake_spec({("Display", "actuator")}, None))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            CompositeSpec("x", frozenset())
        with pytest.raises(ValueError):
            CompositeSpec("x", frozenset({(SC.Display, DeviceKind.ANY)}))

    def test_spec_from_json(self):
        data = json.loads((FIXTURES / "virtual_tv.json").read_text())
        assert spec_from_json(data) == VIRTUAL_TV

    def test_oracle_seeded(self):
        rng = random.Random(17)
        for _ in range(150):
            check_against_oracle(random_devices(rng), random_requirements(rng),
                                 rng.choice(["Bedroom", "Kitchen", None]))

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32))
    def test_failure_monotonicity(self, seed):
        rng = random.Random(seed)
        devices = random_devices(rng)
        required = random_requirements(rng)
        room = rng.choice(["Bedroom", None])
        spec = fake_spec(required, room)
        if not devices:
            return
        victim = rng.choice(devices)
        try:
            recompose(fake_kb(devices), spec)
            covered = True
        except NoCover:
            covered = False
        victim.functioning = False
        if not covered:
            with pytest.raises(NoCover):
                recompose(fake_kb(devices), spec)

    def test_deterministic(self, john_kb):
        assert recompose(john_kb, VIRTUAL_TV) == recompose(john_kb.copy(), VIRTUAL_TV)
