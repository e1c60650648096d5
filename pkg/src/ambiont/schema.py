"""The smart-city assistance ontology and typed views over its individuals.

:func:`base_schema` returns the curated class/property roster as a
:class:`~ambiont.text.Document`; the ``*_view`` functions read hardware,
persons, agents and social relations back out of a loaded KB as plain
records, and the ``*_axioms`` helpers go the other way.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .context import (
    COORDINATE_FIELDS,
    LOCATION_FIELDS,
    ContextPattern,
    ContextRecord,
    DeviceKind,
    LocationRecord,
)
from .kb import (
    Axiom,
    Datatype,
    EntityId,
    KBError,
    KnowledgeBase,
    Literal,
    class_decl,
    dataprop_decl,
    instance,
    objprop_decl,
    rel,
    subclass,
    val,
)
from .text import Document, parse_literal
from .vocab import NAMESPACE, PREFIX, SC

# (class, direct superclass or None)
CLASS_HIERARCHY: list[tuple[str, Optional[str]]] = [
    ("Thing", None),
    ("Hardware", "Thing"),
    ("Device", "Hardware"),
    ("Sensor", "Device"),
    ("Actuator", "Device"),
    ("Appliance", "Hardware"),
    ("ComputeUnit", "Appliance"),
    ("PowerSource", "Appliance"),
    ("CompositeHardware", "Hardware"),
    ("User", "Thing"),
    ("Person", "User"),
    ("Assisted", "Person"),
    ("Caregiver", "Person"),
    ("Agent", "User"),
    ("Location", "Thing"),
    ("Point", "Location"),
    ("District", "Location"),
    ("Street", "Location"),
    ("Building", "Location"),
    ("Floor", "Location"),
    ("Room", "Location"),
    ("Context", "Thing"),
    ("Activity", "Thing"),
    ("ScheduledActivity", "Activity"),
    ("DeducedActivity", "Activity"),
    ("ExecutedActivity", "ScheduledActivity"),
    ("Capability", "Thing"),
    ("Goal", "Thing"),
    ("Action", "Thing"),
    ("DeviceAction", "Action"),
    ("ContactAction", "Action"),
    ("SocialRelation", "Thing"),
]

OBJECT_PROPERTIES: list[tuple[str, str, str]] = [
    ("hasComponent", "CompositeHardware", "Hardware"),
    ("hasCapability", "Hardware", "Capability"),
    ("hasContext", "Thing", "Context"),
    ("hasLocation", "Context", "Location"),
    ("involvesUser", "Context", "User"),
    ("concernsObject", "Context", "Thing"),
    ("hasSubject", "Activity", "User"),
    ("hasInstrument", "Activity", "Hardware"),
    ("hasAction", "Goal", "Action"),
    ("hasGoal", "Agent", "Goal"),
    ("subGoalOf", "Goal", "Goal"),
    ("requiresCapability", "DeviceAction", "Capability"),
    ("hasRelation", "User", "SocialRelation"),
    ("relatesTo", "SocialRelation", "User"),
    ("assists", "Agent", "Person"),
    ("concerns", "ContactAction", "Person"),
]

DATA_PROPERTIES: list[tuple[str, str, str]] = [
    ("latitude", "Location", "decimal"),
    ("longitude", "Location", "decimal"),
    ("altitude", "Location", "decimal"),
    ("district", "Location", "string"),
    ("street", "Location", "string"),
    ("building", "Location", "string"),
    ("floor", "Location", "string"),
    ("room", "Location", "string"),
    ("timeStart", "Context", "integer"),
    ("timeEnd", "Context", "integer"),
    ("isFunctioning", "Hardware", "boolean"),
    ("timestamp", "Activity", "integer"),
    ("actionName", "Activity", "string"),
    ("quality", "SocialRelation", "string"),
    ("function", "SocialRelation", "string"),
    ("profileEntry", "Person", "string"),
    ("preferenceEntry", "Person", "string"),
    ("assistanceNeed", "Assisted", "string"),
    ("aidType", "Caregiver", "string"),
    ("label", "Goal", "string"),
    ("combinator", "Goal", "string"),
    ("goalRole", "Goal", "string"),
    ("verb", "DeviceAction", "string"),
    ("targetRole", "ContactAction", "string"),
    ("requiredFunction", "ContactAction", "string"),
    ("messageKind", "ContactAction", "string"),
]

CAPABILITIES = ["Acceleration", "Presence", "Display", "Audio",
                "TouchInput", "ButtonInput", "Illumination"]


def base_schema() -> Document:
    """The shipped smart-city schema (classes, properties, capabilities)."""
    axioms: list[Axiom] = []
    for name, parent in CLASS_HIERARCHY:
        axioms.append(class_decl(SC(name)))
        if parent is not None:
            axioms.append(subclass(SC(name), SC(parent)))
    for name, domain, range_ in OBJECT_PROPERTIES:
        axioms.append(objprop_decl(SC(name), SC(domain), SC(range_)))
    for name, domain, dt in DATA_PROPERTIES:
        axioms.append(dataprop_decl(SC(name), SC(domain), dt))
    for cap in CAPABILITIES:
        axioms.append(instance(SC(cap), SC.Capability))
    return Document({PREFIX: NAMESPACE}, axioms)


# -- errors -----------------------------------------------------------------

class ViewError(KBError):
    pass


class NotHardware(ViewError):
    pass


class WrongClass(ViewError):
    pass


class MalformedRecord(ViewError):
    pass


# -- records ----------------------------------------------------------------

class HardwareKind(str, enum.Enum):
    SENSOR = "Sensor"
    ACTUATOR = "Actuator"
    COMPUTE_UNIT = "ComputeUnit"
    POWER_SOURCE = "PowerSource"
    COMPOSITE = "Composite"

    @property
    def class_id(self) -> EntityId:
        return SC.CompositeHardware if self is HardwareKind.COMPOSITE else SC(self.value)


# checked in this order, so a composite that is also tagged Sensor is a composite
_KIND_CLASSES = [
    (SC.CompositeHardware, HardwareKind.COMPOSITE),
    (SC.Sensor, HardwareKind.SENSOR),
    (SC.Actuator, HardwareKind.ACTUATOR),
    (SC.ComputeUnit, HardwareKind.COMPUTE_UNIT),
    (SC.PowerSource, HardwareKind.POWER_SOURCE),
]


@dataclass(frozen=True)
class HardwareRecord:
    id: EntityId
    kind: HardwareKind
    capabilities: frozenset[EntityId] = frozenset()
    components: tuple[EntityId, ...] = ()
    functioning: bool = True
    context: Optional[ContextRecord] = None


class RelationFunction(str, enum.Enum):
    INFORMATIONAL = "Informational"
    INSTRUMENTAL = "Instrumental"
    EMOTIONAL = "Emotional"


STANDARD_QUALITIES = ("Satisfying", "Ambivalent", "Indifferent")


@dataclass(frozen=True)
class SocialRelation:
    """A qualified link between two users.

    ``quality`` is one of :data:`STANDARD_QUALITIES` or any other tag.
    """

    id: EntityId
    source: EntityId
    target: EntityId
    quality: str
    functions: frozenset[RelationFunction]

    def __post_init__(self) -> None:
        if not self.functions:
            raise MalformedRecord(f"relation {self.id} has no function")

    @property
    def is_standard_quality(self) -> bool:
        return self.quality in STANDARD_QUALITIES


class PersonRole(str, enum.Enum):
    ASSISTED = "Assisted"
    CAREGIVER = "Caregiver"


@dataclass(frozen=True)
class PersonRecord:
    id: EntityId
    role: PersonRole
    profile: dict[str, Literal] = field(default_factory=dict, hash=False)
    preferences: dict[str, Literal] = field(default_factory=dict, hash=False)
    assistance_needs: frozenset[str] = frozenset()
    aid_types: frozenset[str] = frozenset()


@dataclass(frozen=True)
class AgentRecord:
    id: EntityId
    goals: tuple[EntityId, ...] = ()
    assists: tuple[EntityId, ...] = ()


# -- contexts in the KB -----------------------------------------------------

def read_location(kb: KnowledgeBase, loc: EntityId) -> LocationRecord:
    values = {}
    for name in LOCATION_FIELDS:
        v = kb.first_value(loc, SC(name))
        if v is not None:
            values[name] = v.value if name in COORDINATE_FIELDS else v.lexical
    return LocationRecord(**values)


def _read_context_parts(kb: KnowledgeBase, ctx: EntityId):
    loc_id = kb.first_value(ctx, SC.hasLocation)
    location = read_location(kb, loc_id) if loc_id is not None else None
    users = frozenset(kb.property_values(ctx, SC.involvesUser))
    obj = kb.first_value(ctx, SC.concernsObject)
    start = kb.first_value(ctx, SC.timeStart)
    end = kb.first_value(ctx, SC.timeEnd)
    if (start is None) != (end is None):
        raise MalformedRecord(f"context {ctx} has a half-open time interval")
    time = (start.value, end.value) if start is not None else None
    return location, users, obj, time


def read_context(kb: KnowledgeBase, ctx: EntityId) -> ContextRecord:
    try:
        return ContextRecord(*_read_context_parts(kb, ctx))
    except ValueError as exc:
        raise MalformedRecord(f"context {ctx}: {exc}") from None


def read_pattern(kb: KnowledgeBase, ctx: EntityId) -> ContextPattern:
    return ContextPattern(*_read_context_parts(kb, ctx))


def location_axioms(loc_id: EntityId, location: LocationRecord,
                    cls: EntityId = SC.Location) -> list[Axiom]:
    out = [instance(loc_id, cls)]
    for name, value in location.items():
        if name in COORDINATE_FIELDS:
            out.append(val(loc_id, SC(name), Decimal(value)))
        else:
            out.append(val(loc_id, SC(name), Literal(Datatype.STRING, str(value))))
    return out


def context_axioms(ctx_id: EntityId, ctx, loc_id: Optional[EntityId] = None) -> list[Axiom]:
    """Axioms describing a context (or pattern) as a ``sc:Context`` individual.

    When ``loc_id`` names an existing location individual it is linked rather
    than redefined; otherwise ``<ctx_id>_loc`` is created.
    """
    out = [instance(ctx_id, SC.Context)]
    if ctx.location is not None:
        if loc_id is None:
            loc_id = EntityId(ctx_id.prefix, ctx_id.local + "_loc")
            out += location_axioms(loc_id, ctx.location)
        out.append(rel(ctx_id, SC.hasLocation, loc_id))
    out += [rel(ctx_id, SC.involvesUser, u) for u in sorted(ctx.users)]
    if ctx.object is not None:
        out.append(rel(ctx_id, SC.concernsObject, ctx.object))
    if ctx.time is not None:
        out.append(val(ctx_id, SC.timeStart, ctx.time[0]))
        out.append(val(ctx_id, SC.timeEnd, ctx.time[1]))
    return out


# -- hardware ---------------------------------------------------------------

def component_closure(kb: KnowledgeBase, root: EntityId) -> list[EntityId]:
    """Transitive hasComponent closure; raises on a cycle back to any ancestor."""
    seen: set[EntityId] = set()
    out: list[EntityId] = []

    def visit(node: EntityId, path: frozenset) -> None:
        for child in kb.property_values(node, SC.hasComponent):
            if child in path:
                raise CyclicComposition(f"component cycle through {child}")
            if child not in seen:
                seen.add(child)
                out.append(child)
            visit(child, path | {child})

    visit(root, frozenset({root}))
    return sorted(out)


class CyclicComposition(MalformedRecord):
    pass


def hardware_view(kb: KnowledgeBase, hw: EntityId) -> HardwareRecord:
    if not kb.is_instance_of(hw, SC.Hardware):
        raise NotHardware(f"{hw} is not Hardware")
    kind = next((k for cls, k in _KIND_CLASSES if kb.is_instance_of(hw, cls)), None)
    if kind is None:
        raise MalformedRecord(f"{hw} has no concrete hardware kind")
    components = tuple(kb.property_values(hw, SC.hasComponent)) \
        if kb.is_instance_of(hw, SC.CompositeHardware) else ()
    if kind is HardwareKind.COMPOSITE:
        if not components:
            raise MalformedRecord(f"composite {hw} has no components")
        component_closure(kb, hw)
    flags = kb.property_values(hw, SC.isFunctioning)
    functioning = all(f.value for f in flags)
    ctx_id = kb.first_value(hw, SC.hasContext)
    return HardwareRecord(
        id=hw,
        kind=kind,
        capabilities=frozenset(kb.property_values(hw, SC.hasCapability)),
        components=components,
        functioning=functioning,
        context=read_context(kb, ctx_id) if ctx_id is not None else None,
    )


def hardware_axioms(rec: HardwareRecord, ctx_id: Optional[EntityId] = None) -> list[Axiom]:
    """Axioms that make :func:`hardware_view` reproduce ``rec``.

    Components must already exist in the KB; the context (if any) becomes
    the individual ``ctx_id`` (default ``<id>_ctx``).
    """
    out = [instance(rec.id, rec.kind.class_id)]
    out += [rel(rec.id, SC.hasCapability, c) for c in sorted(rec.capabilities)]
    out += [rel(rec.id, SC.hasComponent, c) for c in rec.components]
    out.append(val(rec.id, SC.isFunctioning, rec.functioning))
    if rec.context is not None:
        ctx_id = ctx_id or EntityId(rec.id.prefix, rec.id.local + "_ctx")
        out += context_axioms(ctx_id, rec.context)
        out.append(rel(rec.id, SC.hasContext, ctx_id))
    return out


def hardware_ids(kb: KnowledgeBase) -> list[EntityId]:
    return kb.instances_of(SC.Hardware)


def top_level_hardware(kb: KnowledgeBase) -> list[EntityId]:
    """Hardware that is not a component of other hardware."""
    return [h for h in hardware_ids(kb) if not kb.subjects_of(SC.hasComponent, h)]


def offerings(kb: KnowledgeBase, rec: HardwareRecord) -> set[tuple[EntityId, HardwareKind]]:
    """(capability, kind) pairs a functioning device can serve.

    A composite offers what its functioning components offer, plus its own
    declared capabilities under the composite kind.
    """
    if not rec.functioning:
        return set()
    out = {(c, rec.kind) for c in rec.capabilities}
    for comp in rec.components:
        out |= offerings(kb, hardware_view(kb, comp))
    return out


def offers(kb: KnowledgeBase, rec: HardwareRecord, capability: EntityId,
           kind: DeviceKind = DeviceKind.ANY) -> bool:
    for cap, k in offerings(kb, rec):
        if cap != capability:
            continue
        if kind is DeviceKind.ANY or k.value.lower() == kind.value:
            return True
    return False


def parent_of(kb: KnowledgeBase, hw: EntityId) -> Optional[EntityId]:
    parents = kb.subjects_of(SC.hasComponent, hw)
    return parents[0] if parents else None


def effective_view(kb: KnowledgeBase, hw: EntityId) -> HardwareRecord:
    """View of a device as an assignable unit inside its enclosing composites.

    A component without its own context inherits the nearest ancestor's, and
    it counts as functioning only if every enclosing composite does too.
    """
    rec = hardware_view(kb, hw)
    ctx, ok = rec.context, rec.functioning
    seen = {hw}
    parent = parent_of(kb, hw)
    while parent is not None and parent not in seen:
        seen.add(parent)
        prec = hardware_view(kb, parent)
        ok = ok and prec.functioning
        if ctx is None:
            ctx = prec.context
        parent = parent_of(kb, parent)
    return HardwareRecord(rec.id, rec.kind, rec.capabilities, rec.components, ok, ctx)


# -- users ------------------------------------------------------------------

def _entries(kb: KnowledgeBase, person: EntityId, prop: EntityId) -> dict[str, Literal]:
    out = {}
    for lit in kb.property_values(person, prop):
        key, sep, raw = lit.lexical.partition("=")
        if not sep:
            raise MalformedRecord(f"{person}: entry {lit.lexical!r} is not key=value")
        try:
            out[key] = parse_literal(raw)
        except ValueError:
            raise MalformedRecord(f"{person}: bad value in entry {lit.lexical!r}") from None
    return out


def entry_literal(key: str, value: Literal) -> Literal:
    """Encode one profile/preference entry as ``key=<literal text>``."""
    return Literal(Datatype.STRING, f"{key}={value.render()}")


def person_view(kb: KnowledgeBase, person: EntityId) -> PersonRecord:
    if kb.is_instance_of(person, SC.Assisted):
        role = PersonRole.ASSISTED
    elif kb.is_instance_of(person, SC.Caregiver):
        role = PersonRole.CAREGIVER
    else:
        raise WrongClass(f"{person} is neither Assisted nor Caregiver")
    needs = frozenset(v.lexical for v in kb.property_values(person, SC.assistanceNeed))
    aids = frozenset(v.lexical for v in kb.property_values(person, SC.aidType))
    return PersonRecord(
        id=person,
        role=role,
        profile=_entries(kb, person, SC.profileEntry),
        preferences=_entries(kb, person, SC.preferenceEntry),
        assistance_needs=needs,
        aid_types=aids,
    )


def person_axioms(rec: PersonRecord) -> list[Axiom]:
    out = [instance(rec.id, SC(rec.role.value))]
    out += [val(rec.id, SC.profileEntry, entry_literal(k, v)) for k, v in rec.profile.items()]
    out += [val(rec.id, SC.preferenceEntry, entry_literal(k, v))
            for k, v in rec.preferences.items()]
    out += [val(rec.id, SC.assistanceNeed, n) for n in sorted(rec.assistance_needs)]
    out += [val(rec.id, SC.aidType, a) for a in sorted(rec.aid_types)]
    return out


def agent_view(kb: KnowledgeBase, agent: EntityId) -> AgentRecord:
    if not kb.is_instance_of(agent, SC.Agent):
        raise WrongClass(f"{agent} is not an Agent")
    goals = tuple(kb.property_values(agent, SC.hasGoal))
    for g in goals:
        if not kb.is_instance_of(g, SC.Goal):
            raise MalformedRecord(f"goal {g} of {agent} is not a Goal")
    return AgentRecord(agent, goals, tuple(kb.property_values(agent, SC.assists)))


def relation_view(kb: KnowledgeBase, rel_id: EntityId) -> SocialRelation:
    sources = kb.subjects_of(SC.hasRelation, rel_id)
    targets = kb.property_values(rel_id, SC.relatesTo)
    if len(sources) != 1 or len(targets) != 1:
        raise MalformedRecord(f"relation {rel_id} needs exactly one source and one target")
    quality = kb.first_value(rel_id, SC.quality)
    try:
        functions = frozenset(RelationFunction(f.lexical)
                              for f in kb.property_values(rel_id, SC.function))
    except ValueError as exc:
        raise MalformedRecord(f"relation {rel_id}: {exc}") from None
    return SocialRelation(rel_id, sources[0], targets[0],
                          quality.lexical if quality is not None else "Indifferent",
                          functions)


def relation_axioms(r: SocialRelation) -> list[Axiom]:
    out = [instance(r.id, SC.SocialRelation),
           rel(r.source, SC.hasRelation, r.id),
           rel(r.id, SC.relatesTo, r.target),
           val(r.id, SC.quality, r.quality)]
    out += [val(r.id, SC.function, f.value) for f in sorted(r.functions)]
    return out


def relations_of(kb: KnowledgeBase, user: EntityId) -> list[SocialRelation]:
    """Social relations in which ``user`` is either endpoint."""
    if not kb.is_instance_of(user, SC.User):
        raise WrongClass(f"{user} is not a User")
    ids = set(kb.property_values(user, SC.hasRelation)) | set(kb.subjects_of(SC.relatesTo, user))
    rels = [relation_view(kb, r) for r in ids]
    return sorted(rels, key=lambda r: (r.source, r.target, r.id))


def catalog_names() -> set[str]:
    """Every class, property and capability local name the schema defines."""
    return ({c for c, _ in CLASS_HIERARCHY}
            | {p for p, _, _ in OBJECT_PROPERTIES}
            | {p for p, _, _ in DATA_PROPERTIES}
            | set(CAPABILITIES))
