from dataclasses import replace
from decimal import Decimal

import pytest

from ambiont.context import ContextRecord, LocationRecord
from ambiont.kb import KnowledgeBase, Literal, instance, rel, subclass, val
from ambiont.schema import (
    CAPABILITIES,
    CyclicComposition,
    HardwareKind,
    HardwareRecord,
    MalformedRecord,
    NotHardware,
    PersonRecord,
    PersonRole,
    RelationFunction,
    SocialRelation,
    WrongClass,
    agent_view,
    base_schema,
    catalog_names,
    component_closure,
    effective_view,
    hardware_axioms,
    hardware_ids,
    hardware_view,
    person_axioms,
    person_view,
    read_context,
    relation_axioms,
    relation_view,
    relations_of,
    top_level_hardware,
)
from ambiont.text import parse, serialize, stats
from ambiont.vocab import SC
from ambiont.worlds import BEDROOM

# every concept and property the toolkit documents as part of the vocabulary
REQUIRED_NAMES = """
Hardware Device Sensor Actuator Appliance ComputeUnit PowerSource CompositeHardware
User Person Assisted Caregiver Agent Location Point District Street Building Floor Room
Activity ScheduledActivity DeducedActivity ExecutedActivity Context Capability Goal
SocialRelation Action DeviceAction ContactAction
hasComponent hasCapability hasContext hasLocation hasSubject hasAction hasInstrument
hasGoal subGoalOf requiresCapability relatesTo
latitude longitude altitude isFunctioning timestamp quality function profileEntry preferenceEntry
Acceleration Presence Display Audio TouchInput ButtonInput
""".split()

HIERARCHY = [
    ("Sensor", "Device"), ("Device", "Hardware"), ("Actuator", "Device"),
    ("ComputeUnit", "Appliance"), ("Appliance", "Hardware"), ("PowerSource", "Appliance"),
    ("CompositeHardware", "Hardware"), ("Person", "User"), ("Assisted", "Person"),
    ("Caregiver", "Person"), ("Agent", "User"), ("Point", "Location"),
    ("District", "Location"), ("Street", "Location"), ("Building", "Location"),
    ("Floor", "Location"), ("Room", "Location"), ("ScheduledActivity", "Activity"),
    ("DeducedActivity", "Activity"),
]


def test_schema_loads_and_is_small():
    doc = base_schema()
    kb = doc.to_kb()
    s = stats(doc)
    assert s.axiom_count <= 400 and s.byte_size <= 61_440
    assert kb.axiom_count() == s.axiom_count


def test_schema_round_trips():
    data = serialize(base_schema())
    assert serialize(parse(data)) == data


def test_catalog_complete(schema_kb):
    names = catalog_names()
    for n in REQUIRED_NAMES:
        assert n in names, n
        e = SC(n)
        assert schema_kb.is_class(e) or schema_kb.is_property(e) or schema_kb.is_individual(e), n
    for cap in CAPABILITIES:
        assert schema_kb.is_instance_of(SC(cap), SC.Capability)


@pytest.mark.parametrize("sub,sup", HIERARCHY)
def test_hierarchy(schema_kb, sub, sup):
    assert subclass(SC(sub), SC(sup)) in schema_kb


def test_schema_examples(schema_kb):
    assert schema_kb.is_subclass_of(SC.Assisted, SC.User)
    assert not schema_kb.is_subclass_of(SC.Sensor, SC.Appliance)


class TestHardwareView:
    def test_tv(self, john_kb):
        tv = hardware_view(john_kb, SC.tv1)
        assert tv.kind is HardwareKind.COMPOSITE
        assert tv.components == (SC.screen1, SC.speaker1)
        assert not tv.functioning
        assert tv.context.location == BEDROOM

    def test_screen(self, john_kb):
        s = hardware_view(john_kb, SC.screen1)
        assert s.kind is HardwareKind.ACTUATOR
        assert s.capabilities == {SC.Display}
        assert s.components == ()
        assert s.functioning and s.context is None

    def test_not_hardware(self, john_kb):
        with pytest.raises(NotHardware):
            hardware_view(john_kb, SC.john)

    def test_composite_without_components(self, schema_kb):
        schema_kb.add_axiom(instance(SC.empty, SC.CompositeHardware))
        with pytest.raises(MalformedRecord):
            hardware_view(schema_kb, SC.empty)

    def test_missing_flag_defaults_to_functioning(self, schema_kb):
        schema_kb.add_axiom(instance(SC.s, SC.Sensor))
        assert hardware_view(schema_kb, SC.s).functioning

    def test_round_trip_on_fixture(self, john_kb):
        for hw in hardware_ids(john_kb):
            rec = hardware_view(john_kb, hw)
            kb = base_schema().to_kb()
            kb.add_axiom(instance(SC.john, SC.Assisted))
            for comp in component_closure(john_kb, hw) if rec.components else ():
                for ax in hardware_axioms(replace(hardware_view(john_kb, comp), context=None)):
                    kb.add_axiom(ax)
            for ax in hardware_axioms(rec):
                kb.add_axiom(ax)
            assert hardware_view(kb, hw) == rec

    def test_round_trip_with_rich_context(self, schema_kb):
        loc = LocationRecord(latitude=Decimal("-21.1151"), longitude=Decimal("55.5364"),
                             altitude=Decimal("12.0"), building="B", floor="2", room="R")
        schema_kb.add_axiom(instance(SC.mary, SC.Assisted))
        schema_kb.add_axiom(instance(SC.cup, SC.Thing))
        ctx = ContextRecord(loc, frozenset({SC.mary}), SC.cup, (5, 10))
        rec = HardwareRecord(SC.s1, HardwareKind.SENSOR, frozenset({SC.Presence}), (), False, ctx)
        for ax in hardware_axioms(rec):
            schema_kb.add_axiom(ax)
        assert hardware_view(schema_kb, SC.s1) == rec
        assert read_context(schema_kb, SC.s1_ctx) == ctx

    def test_component_cycle(self, schema_kb):
        for ax in [instance(SC.a, SC.CompositeHardware), instance(SC.b, SC.CompositeHardware),
                   rel(SC.a, SC.hasComponent, SC.b), rel(SC.b, SC.hasComponent, SC.a)]:
            schema_kb.add_axiom(ax)
        with pytest.raises(CyclicComposition):
            hardware_view(schema_kb, SC.a)

    def test_top_level_and_effective(self, john_kb):
        top = top_level_hardware(john_kb)
        assert SC.phone1 in top and SC.accelP not in top
        eff = effective_view(john_kb, SC.accelP)
        assert eff.context.users == {SC.john}
        assert not effective_view(john_kb, SC.screen1).functioning
        john_kb.replace_values(SC.phone1, SC.isFunctioning, [False])
        assert not effective_view(john_kb, SC.accelP).functioning
        assert hardware_view(john_kb, SC.accelP).functioning


class TestUsers:
    def test_person_view(self, john_kb):
        john = person_view(john_kb, SC.john)
        assert john.role is PersonRole.ASSISTED
        assert john.profile["name"] == Literal.of("John Doe")
        assert john.preferences == {"language": Literal.of("fr")}
        assert john.assistance_needs == {"mobility"}
        jane = person_view(john_kb, SC.jane)
        assert jane.role is PersonRole.CAREGIVER
        assert "instrumental" in jane.aid_types

    def test_person_round_trip(self, schema_kb):
        rec = PersonRecord(SC.p, PersonRole.CAREGIVER,
                           profile={"age": Literal.of(71), "note": Literal.of('a=b "c"')},
                           preferences={"volume": Literal.of(Decimal("0.8"))},
                           aid_types=frozenset({"emotional"}))
        for ax in person_axioms(rec):
            schema_kb.add_axiom(ax)
        back = person_view(schema_kb, SC.p)
        assert back == rec and back.profile == rec.profile and back.preferences == rec.preferences

    def test_wrong_class(self, john_kb):
        with pytest.raises(WrongClass):
            person_view(john_kb, SC.agent_a)
        with pytest.raises(WrongClass):
            agent_view(john_kb, SC.john)

    def test_agent_view(self, john_kb):
        a = agent_view(john_kb, SC.agent_a)
        assert a.goals == (SC.g_fall_assist,)
        assert a.assists == (SC.john,)
        assert agent_view(john_kb, SC.agent_idle).goals == ()

    def test_relations(self, john_kb):
        rels = relations_of(john_kb, SC.john)
        assert len(rels) == 1
        r = rels[0]
        assert (r.source, r.target) == (SC.john, SC.jane)
        assert r.functions == {RelationFunction.INSTRUMENTAL, RelationFunction.EMOTIONAL}
        assert r.quality == "Satisfying" and r.is_standard_quality
        assert relations_of(john_kb, SC.jane) == rels
        assert relations_of(john_kb, SC.paul) == []

    def test_relation_other_quality_round_trip(self, john_kb):
        r = SocialRelation(SC.rel_x, SC.paul, SC.jane, "Neighbourly",
                           frozenset({RelationFunction.INFORMATIONAL}))
        for ax in relation_axioms(r):
            john_kb.add_axiom(ax)
        assert relation_view(john_kb, SC.rel_x) == r
        assert not r.is_standard_quality

    def test_relation_needs_function(self):
        with pytest.raises(MalformedRecord):
            SocialRelation(SC.r, SC.a, SC.b, "Satisfying", frozenset())


def test_component_closure_nested(schema_kb):
    for ax in [instance(SC.c, SC.Sensor), instance(SC.B, SC.CompositeHardware),
               instance(SC.A, SC.CompositeHardware), rel(SC.B, SC.hasComponent, SC.c),
               rel(SC.A, SC.hasComponent, SC.B), val(SC.c, SC.isFunctioning, True)]:
        schema_kb.add_axiom(ax)
    assert set(component_closure(schema_kb, SC.A)) >= {SC.B, SC.c}


def test_fixture_component_graph_acyclic(john_kb):
    from oracles import has_cycle
    edges = [(str(h), str(c)) for h in hardware_ids(john_kb)
             for c in john_kb.property_values(h, SC.hasComponent)]
    assert not has_cycle(edges)


def test_fresh_kb_is_independent():
    a, b = base_schema().to_kb(), base_schema().to_kb()
    a.add_axiom(instance(SC.x, SC.Sensor))
    assert not b.is_individual(SC.x)
    assert isinstance(a, KnowledgeBase)
