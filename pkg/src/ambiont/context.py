"""Context aggregates and superposition matching.

A context answers who / what / when / where: a set of users, an optional
object, an optional closed time interval (integer milliseconds) and an
optional location.  A pattern has the same shape, every part optional; a
concrete context validates a pattern when each specified part agrees.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional
from urllib.parse import quote, unquote

from .kb import EntityId, KnowledgeBase, UndeclaredEntity

LOCATION_FIELDS = (
    "latitude", "longitude", "altitude",
    "district", "street", "building", "floor", "room",
)
COORDINATE_FIELDS = LOCATION_FIELDS[:3]


@dataclass(frozen=True)
class LocationRecord:
    """Where something is: a geographic point and/or symbolic places.

    Symbolic fields are compared as plain strings, so ``floor`` is ``"2"``.
    """

    latitude: Optional[Decimal] = None
    longitude: Optional[Decimal] = None
    altitude: Optional[Decimal] = None
    district: Optional[str] = None
    street: Optional[str] = None
    building: Optional[str] = None
    floor: Optional[str] = None
    room: Optional[str] = None

    def items(self) -> list[tuple[str, object]]:
        return [(f, getattr(self, f)) for f in LOCATION_FIELDS if getattr(self, f) is not None]

    def is_empty(self) -> bool:
        return not self.items()

    def validate(self) -> None:
        if self.is_empty():
            raise ValueError("location needs at least one field")
        if (self.latitude is None) != (self.longitude is None):
            raise ValueError("latitude and longitude go together")
        if self.altitude is not None and self.latitude is None:
            raise ValueError("altitude needs latitude and longitude")
        if (self.room is not None or self.floor is not None) and self.building is None:
            raise ValueError("room/floor need a building")


@dataclass(frozen=True)
class ContextRecord:
    location: Optional[LocationRecord] = None
    users: frozenset[EntityId] = frozenset()
    object: Optional[EntityId] = None
    time: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", frozenset(self.users))
        if self.location is not None:
            self.location.validate()
        if self.time is not None:
            start, end = self.time
            if start > end:
                raise ValueError(f"time interval reversed: {self.time}")
        if self.specificity == 0:
            raise ValueError("context needs at least one dimension")

    @property
    def specificity(self) -> int:
        """Number of populated dimensions (0-4)."""
        return sum((
            self.location is not None,
            bool(self.users),
            self.object is not None,
            self.time is not None,
        ))


@dataclass(frozen=True)
class ContextPattern:
    """Required context; the empty pattern matches everything."""

    location: Optional[LocationRecord] = None
    users: frozenset[EntityId] = field(default_factory=frozenset)
    object: Optional[EntityId] = None
    time: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", frozenset(self.users))
        if self.location is not None and self.location.is_empty():
            object.__setattr__(self, "location", None)

    def constraints(self) -> list[tuple[str, object]]:
        """Flat list of individual constraints, in a stable order."""
        out: list[tuple[str, object]] = []
        if self.location is not None:
            out += self.location.items()
        out += [("user", u) for u in sorted(self.users)]
        if self.object is not None:
            out.append(("object", self.object))
        if self.time is not None:
            out.append(("time", self.time))
        return out

    def without(self, constraint: tuple[str, object]) -> ContextPattern:
        """Copy of this pattern with one constraint dropped."""
        name, value = constraint
        if name == "user":
            return ContextPattern(self.location, self.users - {value}, self.object, self.time)
        if name == "object":
            return ContextPattern(self.location, self.users, None, self.time)
        if name == "time":
            return ContextPattern(self.location, self.users, self.object, None)
        loc = LocationRecord(**{f: getattr(self.location, f) for f in LOCATION_FIELDS if f != name})
        return ContextPattern(loc, self.users, self.object, self.time)


Context = Optional[ContextRecord]


def matches(pattern: ContextPattern, ctx: Context) -> bool:
    """Does ``ctx`` validate every dimension specified by ``pattern``?

    ``ctx`` may be None (an entity with no recorded context), which only the
    empty pattern matches.
    """
    loc = ctx.location if ctx is not None else None
    if pattern.location is not None:
        for name, want in pattern.location.items():
            if loc is None or getattr(loc, name) != want:
                return False
    if pattern.users and not pattern.users <= (ctx.users if ctx is not None else frozenset()):
        return False
    if pattern.object is not None and (ctx is None or ctx.object != pattern.object):
        return False
    if pattern.time is not None:
        if ctx is None or ctx.time is None:
            return False
        (ps, pe), (cs, ce) = pattern.time, ctx.time
        if ps > ce or cs > pe:
            return False
    return True


class DeviceKind(str, enum.Enum):
    SENSOR = "sensor"
    ACTUATOR = "actuator"
    ANY = "any"


# -- pattern literal: dim=value pairs joined by '&' ------------------------

_NUMBER_RE = re.compile(r"^-?[0-9]+(\.[0-9]+)?$")
_ALIASES = {"lat": "latitude", "lon": "longitude", "lng": "longitude", "alt": "altitude"}


def parse_pattern(text: str) -> ContextPattern:
    """Parse ``building=MaisonDeJohn&room=Bedroom&user=sc:john``.

    Values are percent-decoded (``Maison%20de%20John``).  ``user`` may repeat;
    ``time`` takes ``start..end`` in milliseconds.
    """
    loc: dict[str, object] = {}
    users: set[EntityId] = set()
    obj = None
    time = None
    text = text.strip()
    for part in filter(None, text.split("&")):
        key, sep, raw = part.partition("=")
        key = _ALIASES.get(key.strip(), key.strip())
        value = unquote(raw.strip())
        if not sep or not value:
            raise ValueError(f"pattern component needs key=value: {part!r}")
        if key in COORDINATE_FIELDS:
            if not _NUMBER_RE.match(value):
                raise ValueError(f"{key} needs a decimal number: {value!r}")
            loc[key] = Decimal(value)
        elif key in LOCATION_FIELDS:
            loc[key] = value
        elif key == "user":
            users.add(EntityId.parse(value))
        elif key == "object":
            obj = EntityId.parse(value)
        elif key == "time":
            start, dots, end = value.partition("..")
            if not dots:
                raise ValueError(f"time needs start..end: {value!r}")
            time = (int(start), int(end))
            if time[0] > time[1]:
                raise ValueError(f"time interval reversed: {value!r}")
        else:
            raise ValueError(f"unknown pattern dimension {key!r}")
    location = LocationRecord(**loc) if loc else None
    return ContextPattern(location, frozenset(users), obj, time)


def format_pattern(pattern: ContextPattern) -> str:
    parts = []
    for name, value in pattern.constraints():
        if name == "time":
            parts.append(f"time={value[0]}..{value[1]}")
        else:
            parts.append(f"{name}={quote(str(value), safe=':')}")
    return "&".join(parts)


def pattern_of(ctx: ContextRecord) -> ContextPattern:
    """The pattern that a context validates exactly (all its constraints)."""
    return ContextPattern(ctx.location, ctx.users, ctx.object, ctx.time)


def find_devices(
    kb: KnowledgeBase,
    pattern: ContextPattern,
    capability: EntityId,
    kind: DeviceKind | str = DeviceKind.ANY,
) -> list[EntityId]:
    """Functioning hardware offering ``capability`` whose context fits ``pattern``.

    Candidates are top-level devices: a composite answers for the
    capabilities of its functioning components, and those components are not
    listed on their own.  Output is ordered by context specificity
    (descending) and then by id.
    """
    from . import schema

    kind = DeviceKind(kind)
    if not kb.is_individual(capability):
        raise UndeclaredEntity(capability, "capability")
    hits = []
    for hw in schema.top_level_hardware(kb):
        rec = schema.hardware_view(kb, hw)
        if not rec.functioning:
            continue
        if not schema.offers(kb, rec, capability, kind):
            continue
        if not matches(pattern, rec.context):
            continue
        spec = rec.context.specificity if rec.context is not None else 0
        hits.append((-spec, hw))
    return [hw for _, hw in sorted(hits)]

