import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ambiont.kb import (
    Axiom,
    AxiomKind,
    Datatype,
    DeclarationConflict,
    DomainViolation,
    EntityId,
    KnowledgeBase,
    Literal,
    RangeViolation,
    SubclassCycle,
    UndeclaredEntity,
    add_axiom,
    class_decl,
    dataprop_decl,
    instance,
    objprop_decl,
    rel,
    subclass,
    val,
)
from ambiont.vocab import SC

from oracles import has_cycle, random_dag, reachable


def E(local):
    return EntityId("t", local)


def dag_kb(names, edges):
    axioms = [class_decl(E(n)) for n in names] + [subclass(E(a), E(b)) for a, b in edges]
    return KnowledgeBase(axioms)


class TestEntityId:
    def test_parse_and_render(self):
        e = EntityId.parse("sc:Sensor")
        assert (e.prefix, e.local) == ("sc", "Sensor")
        assert str(e) == "sc:Sensor"

    @pytest.mark.parametrize("bad", ["Sensor", ":x", "sc:", "sc:a b", "sc:a:b", 'sc:"x', "sc:é"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            EntityId.parse(bad)

    def test_order_is_on_rendered_form(self):
        ids = [EntityId("b", "a"), EntityId("a", "z"), EntityId("a", "b")]
        assert [str(i) for i in sorted(ids)] == ["a:b", "a:z", "b:a"]


class TestLiteral:
    def test_decimal_keeps_lexical_form(self):
        lit = Literal(Datatype.DECIMAL, "-21.11510")
        assert lit.lexical == "-21.11510"
        assert lit.value == Decimal("-21.1151")
        assert lit != Literal(Datatype.DECIMAL, "-21.1151")

    def test_of(self):
        assert Literal.of(True) == Literal(Datatype.BOOLEAN, "true")
        assert Literal.of(3) == Literal(Datatype.INTEGER, "3")
        assert Literal.of(Decimal("12")) == Literal(Datatype.DECIMAL, "12.0")
        assert Literal.of(0.5) == Literal(Datatype.DECIMAL, "0.5")
        assert Literal.of('a"b').render() == '"a\\"b"'

    @pytest.mark.parametrize("dt,lex", [
        (Datatype.INTEGER, "1.0"), (Datatype.DECIMAL, "1"), (Datatype.DECIMAL, ".5"),
        (Datatype.BOOLEAN, "True"), (Datatype.STRING, "two\nlines"),
    ])
    def test_rejects_bad_lexical(self, dt, lex):
        with pytest.raises(ValueError):
            Literal(dt, lex)


class TestAddAxiom:
    def test_sensor_under_device_accepted(self, schema_kb):
        add_axiom(schema_kb, subclass(SC.Sensor, SC.Device))
        assert schema_kb.is_subclass_of(SC.Sensor, SC.Device)

    def test_reflexive_edge_is_noop_for_closure(self, schema_kb):
        before = {c: schema_kb.superclasses(c) for c in schema_kb.classes}
        schema_kb.add_axiom(subclass(SC.Device, SC.Device))
        assert {c: schema_kb.superclasses(c) for c in schema_kb.classes} == before
        assert subclass(SC.Device, SC.Device) in schema_kb

    def test_cycle_rejected(self, schema_kb):
        n = len(schema_kb)
        with pytest.raises(SubclassCycle):
            schema_kb.add_axiom(subclass(SC.Hardware, SC.Sensor))
        assert len(schema_kb) == n
        assert not schema_kb.is_subclass_of(SC.Hardware, SC.Sensor)

    def test_undeclared(self):
        kb = KnowledgeBase([class_decl(E("A"))])
        with pytest.raises(UndeclaredEntity):
            kb.add_axiom(subclass(E("A"), E("B")))
        with pytest.raises(UndeclaredEntity):
            kb.add_axiom(rel(E("x"), E("p"), E("y")))
        with pytest.raises(UndeclaredEntity):
            kb.add_axiom(instance(E("x"), E("Nope")))

    def test_domain_and_range(self):
        kb = KnowledgeBase([
            class_decl(E("A")), class_decl(E("B")),
            objprop_decl(E("p"), E("A"), E("B")),
            dataprop_decl(E("n"), E("A"), Datatype.INTEGER),
            instance(E("a"), E("A")), instance(E("b"), E("B")),
        ])
        kb.add_axiom(rel(E("a"), E("p"), E("b")))
        with pytest.raises(DomainViolation):
            kb.add_axiom(rel(E("b"), E("p"), E("b")))
        with pytest.raises(RangeViolation):
            kb.add_axiom(rel(E("a"), E("p"), E("a")))
        with pytest.raises(RangeViolation):
            kb.add_axiom(val(E("a"), E("n"), "seven"))
        with pytest.raises(DomainViolation):
            kb.add_axiom(val(E("b"), E("n"), 7))
        kb.add_axiom(val(E("a"), E("n"), 7))
        assert kb.property_values(E("a"), E("n")) == [Literal.of(7)]

    def test_one_name_one_kind(self):
        kb = KnowledgeBase([class_decl(E("A"))])
        with pytest.raises(DeclarationConflict):
            kb.add_axiom(instance(E("A"), E("A")))
        with pytest.raises(DeclarationConflict):
            kb.add_axiom(objprop_decl(E("A"), E("A"), E("A")))

    def test_property_signature_conflict(self):
        kb = KnowledgeBase([class_decl(E("A")), class_decl(E("B")),
                            objprop_decl(E("p"), E("A"), E("B"))])
        with pytest.raises(DeclarationConflict):
            kb.add_axiom(objprop_decl(E("p"), E("B"), E("B")))
        with pytest.raises(DeclarationConflict):
            kb.add_axiom(dataprop_decl(E("p"), E("A"), Datatype.STRING))

    def test_set_semantics(self):
        kb = KnowledgeBase([class_decl(E("A"))])
        kb.add_axiom(class_decl(E("A")))
        assert kb.axiom_count() == 1

    def test_axiom_arity_checked(self):
        with pytest.raises(TypeError):
            Axiom(AxiomKind.SUBCLASS_OF, (E("A"),))
        with pytest.raises(TypeError):
            Axiom(AxiomKind.DATA_PROP_ASSERTION, (E("a"), E("p"), E("b")))


class TestQueries:
    def test_subclass_examples(self, schema_kb):
        assert schema_kb.is_subclass_of(SC.Sensor, SC.Hardware)
        assert schema_kb.is_subclass_of(SC.Sensor, SC.Sensor)
        assert not schema_kb.is_subclass_of(SC.Agent, SC.Hardware)
        with pytest.raises(UndeclaredEntity):
            schema_kb.is_subclass_of(SC.Nope, SC.Hardware)

    def test_instances_direct_and_inferred(self, schema_kb):
        schema_kb.add_axiom(instance(SC.watch1, SC.Sensor))
        assert schema_kb.instances_of(SC.Device) == [SC.watch1]
        assert schema_kb.instances_of(SC.Device, direct=True) == []
        schema_kb.add_axiom(instance(SC.john, SC.Assisted))
        assert schema_kb.instances_of(SC.Person) == [SC.john]
        with pytest.raises(UndeclaredEntity):
            schema_kb.instances_of(SC.Nope)

    def test_property_values(self, john_kb):
        assert john_kb.property_values(SC.tv1, SC.hasComponent) == [SC.screen1, SC.speaker1]
        assert john_kb.property_values(SC.screen1, SC.hasComponent) == []
        assert john_kb.property_values(SC.point1, SC.latitude) == [Literal(Datatype.DECIMAL, "-21.1151")]
        with pytest.raises(UndeclaredEntity):
            john_kb.property_values(SC.nobody, SC.hasComponent)
        with pytest.raises(UndeclaredEntity):
            john_kb.property_values(SC.tv1, SC.nothing)

    def test_axiom_count(self, schema_kb):
        assert KnowledgeBase().axiom_count() == 0
        kb = KnowledgeBase([class_decl(E(x)) for x in "ABC"]
                           + [subclass(E("A"), E("B")), subclass(E("B"), E("C"))])
        assert kb.axiom_count() == 5
        assert schema_kb.axiom_count() <= 400

    def test_replace_values(self, john_kb):
        john_kb.replace_values(SC.phone1, SC.isFunctioning, [False])
        assert john_kb.property_values(SC.phone1, SC.isFunctioning) == [Literal.of(False)]
        assert val(SC.phone1, SC.isFunctioning, True) not in john_kb
        john_kb.replace_values(SC.phone1, SC.isFunctioning, [True])
        assert john_kb.property_values(SC.phone1, SC.isFunctioning) == [Literal.of(True)]
        with pytest.raises(RangeViolation):
            john_kb.replace_values(SC.phone1, SC.isFunctioning, ["yes"])
        assert john_kb.property_values(SC.phone1, SC.isFunctioning) == [Literal.of(True)]

    def test_subjects_of(self, john_kb):
        assert john_kb.subjects_of(SC.hasComponent, SC.screen1) == [SC.tv1]


def test_closure_matches_reachability_oracle():
    rng = random.Random(11)
    for _ in range(30):
        names, edges = random_dag(rng, 25)
        kb = dag_kb(names, edges)
        for a in names:
            for b in names:
                assert kb.is_subclass_of(E(a), E(b)) == reachable(edges, a, b)


def test_insertion_order_does_not_matter():
    rng = random.Random(5)
    names, edges = random_dag(rng, 20)
    axioms = [class_decl(E(n)) for n in names] + [subclass(E(a), E(b)) for a, b in edges]
    axioms += [instance(E(f"i{k}"), E(rng.choice(names))) for k in range(15)]
    ref = KnowledgeBase(axioms)
    for seed in range(5):
        shuffled = axioms[:]
        random.Random(seed).shuffle(shuffled)
        kb = KnowledgeBase()
        # declarations must come first; within kinds any order
        for ax in sorted(shuffled, key=lambda a: a.kind.rank):
            kb.add_axiom(ax)
        assert list(kb) == list(ref)
        for n in names:
            assert kb.superclasses(E(n)) == ref.superclasses(E(n))
            assert kb.instances_of(E(n)) == ref.instances_of(E(n))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_monotonic_and_acyclic(seed):
    rng = random.Random(seed)
    names = [f"C{i}" for i in range(rng.randint(2, 12))]
    kb = KnowledgeBase([class_decl(E(n)) for n in names])
    accepted: list[tuple[str, str]] = []
    for _ in range(30):
        a, b = rng.choice(names), rng.choice(names)
        before = {(x, y) for x in names for y in names if kb.is_subclass_of(E(x), E(y))}
        try:
            kb.add_axiom(subclass(E(a), E(b)))
            accepted.append((a, b))
        except SubclassCycle:
            assert a != b and reachable(accepted, b, a)
        after = {(x, y) for x in names for y in names if kb.is_subclass_of(E(x), E(y))}
        assert before <= after
        assert not has_cycle(accepted)
