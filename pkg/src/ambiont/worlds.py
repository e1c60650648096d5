"""Ready-made worlds for the John Doe fall-assistance case study.

Each builder returns a full document (schema plus individuals) so it can be
written out as a self-contained ``.amb`` file.
"""

from __future__ import annotations

from dataclasses import replace
from decimal import Decimal

from .context import ContextPattern, ContextRecord, LocationRecord
from .goals import ContactAction, DeviceAction, all_of, goal_axioms, leaf
from .kb import Axiom, Literal, instance, rel
from .schema import (
    HardwareKind,
    HardwareRecord,
    PersonRecord,
    PersonRole,
    RelationFunction,
    SocialRelation,
    base_schema,
    hardware_axioms,
    location_axioms,
    person_axioms,
    relation_axioms,
)
from .text import Document
from .vocab import SC

JOHN_HOUSE = "Maison de John"
BEDROOM = LocationRecord(building=JOHN_HOUSE, floor="2", room="Bedroom")
LIVING_ROOM = LocationRecord(building=JOHN_HOUSE, floor="1", room="LivingRoom")
SAINT_DENIS = LocationRecord(latitude=Decimal("-21.1151"), longitude=Decimal("55.5364"),
                             altitude=Decimal("12.0"), district="Centre")

WITH_JOHN = ContextRecord(users=frozenset({SC.john}))


def _device(id_, kind, caps=(), components=(), functioning=True, context=None):
    return HardwareRecord(SC(id_), kind, frozenset(SC(c) for c in caps),
                          tuple(SC(c) for c in components), functioning, context)


def _located(ctx_name: str, loc_name: str) -> list[Axiom]:
    return [instance(SC(ctx_name), SC.Context), rel(SC(ctx_name), SC.hasLocation, SC(loc_name))]


def people() -> list[Axiom]:
    john = PersonRecord(
        SC.john, PersonRole.ASSISTED,
        profile={"name": Literal.of("John Doe"), "mobility": Literal.of("wheelchair")},
        preferences={"language": Literal.of("fr")},
        assistance_needs=frozenset({"mobility"}),
    )
    jane = PersonRecord(SC.jane, PersonRole.CAREGIVER, profile={"name": Literal.of("Jane Doe")},
                        aid_types=frozenset({"instrumental", "emotional"}))
    paul = PersonRecord(SC.paul, PersonRole.CAREGIVER, profile={"name": Literal.of("Paul")},
                        aid_types=frozenset({"informational"}))
    link = SocialRelation(SC.rel_john_jane, SC.john, SC.jane, "Satisfying",
                          frozenset({RelationFunction.INSTRUMENTAL, RelationFunction.EMOTIONAL}))
    return [*person_axioms(john), *person_axioms(jane), *person_axioms(paul),
            *relation_axioms(link)]


def fall_assist_goal():
    """The assistance agent's goal tree, children listed in id order."""
    john_only = ContextPattern(users=frozenset({SC.john}))
    return all_of(
        SC.g_fall_assist, "Assister John en cas de chute",
        leaf(SC.g_alert_caregiver, "Avertir un aidant",
             ContactAction("fall-alert", PersonRole.CAREGIVER, related_to=SC.john),
             role="notify-caregiver"),
        leaf(SC.g_detect_fall, "Détecter une chute",
             DeviceAction(SC.Acceleration, "observe", john_only), role="detect-fall"),
        all_of(
            SC.g_offer_cancel, "Proposer d'annuler l'assistance",
            leaf(SC.g_offer_cancel_button, "Recevoir l'annulation",
                 DeviceAction(SC.ButtonInput, "observe", john_only)),
            leaf(SC.g_offer_cancel_display, "Afficher le délai",
                 DeviceAction(SC.Display, "actuate", john_only)),
            role="offer-cancel",
        ),
    )


def agents() -> list[Axiom]:
    out = [instance(SC.agent_a, SC.Agent), rel(SC.agent_a, SC.assists, SC.john),
           instance(SC.agent_idle, SC.Agent)]
    out += goal_axioms(SC.agent_a, fall_assist_goal())
    return out


def john_devices() -> list[Axiom]:
    """John's phone and watch (both carried, both sensing acceleration)."""
    parts = [
        _device("accelP", HardwareKind.SENSOR, ["Acceleration"]),
        _device("touchP", HardwareKind.SENSOR, ["TouchInput"]),
        _device("screenP", HardwareKind.ACTUATOR, ["Display"]),
        _device("speakerP", HardwareKind.ACTUATOR, ["Audio"]),
        _device("accelW", HardwareKind.SENSOR, ["Acceleration"]),
        _device("buttonW", HardwareKind.SENSOR, ["ButtonInput"]),
        _device("screenW", HardwareKind.ACTUATOR, ["Display"]),
    ]
    phone = _device("phone1", HardwareKind.COMPOSITE,
                    components=["accelP", "screenP", "speakerP", "touchP"], context=WITH_JOHN)
    watch = _device("watch1", HardwareKind.COMPOSITE,
                    components=["accelW", "buttonW", "screenW"], context=WITH_JOHN)
    out = [ax for p in parts for ax in hardware_axioms(p)]
    out += hardware_axioms(phone, SC.ctx_phone1)
    out += hardware_axioms(watch, SC.ctx_watch1)
    return out


def bedroom_devices() -> list[Axiom]:
    """A failed TV plus loose screens, speakers and a lamp around the house."""
    out = location_axioms(SC.loc_bedroom, BEDROOM, SC.Room)
    out += location_axioms(SC.loc_living, LIVING_ROOM, SC.Room)
    out += _located("ctx_bedroom", "loc_bedroom") + _located("ctx_living", "loc_living")
    bedroom = ContextRecord(location=BEDROOM)
    living = ContextRecord(location=LIVING_ROOM)
    records = [
        _device("screen1", HardwareKind.ACTUATOR, ["Display"]),
        _device("speaker1", HardwareKind.ACTUATOR, ["Audio"]),
        _device("screen2", HardwareKind.ACTUATOR, ["Display"], context=bedroom),
        _device("speaker2", HardwareKind.ACTUATOR, ["Audio"], context=bedroom),
        _device("lamp1", HardwareKind.ACTUATOR, ["Illumination"], context=bedroom),
        _device("presence1", HardwareKind.SENSOR, ["Presence"], context=bedroom),
        _device("screen3", HardwareKind.ACTUATOR, ["Display"], context=living),
        _device("speaker3", HardwareKind.ACTUATOR, ["Audio"], context=living),
        _device("rpi1", HardwareKind.COMPUTE_UNIT, context=living),
        _device("battery1", HardwareKind.POWER_SOURCE),
    ]
    shared = {BEDROOM: SC.ctx_bedroom, LIVING_ROOM: SC.ctx_living}
    for rec in records:
        out += hardware_axioms(replace(rec, context=None))
        if rec.context is not None:
            out.append(rel(rec.id, SC.hasContext, shared[rec.context.location]))
    tv = _device("tv1", HardwareKind.COMPOSITE, components=["screen1", "speaker1"],
                 functioning=False)
    out += hardware_axioms(tv) + [rel(SC.tv1, SC.hasContext, SC.ctx_bedroom)]
    out += location_axioms(SC.point1, SAINT_DENIS, SC.Point)
    return out


def _doc(axioms: list[Axiom]) -> Document:
    schema = base_schema()
    return Document(dict(schema.prefixes), list(dict.fromkeys([*schema.statements, *axioms])))


def john_world() -> Document:
    """Schema + John, his caregivers, agent_a, phone, watch and the house."""
    return _doc(people() + agents() + john_devices() + bedroom_devices())


def pendant_world() -> Document:
    """John with only a bare accelerometer pendant: no screen, no button."""
    pendant = _device("pendant1", HardwareKind.SENSOR, ["Acceleration"], context=WITH_JOHN)
    return _doc(people() + agents() + hardware_axioms(pendant))


WORLDS = {
    "john_world.amb": john_world,
    "pendant_world.amb": pendant_world,
}
