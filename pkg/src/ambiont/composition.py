"""Decomposition of composite hardware and recomposition of virtual composites.

Recomposition looks for the smallest set of devices that together cover a
list of (capability, kind) requirements, with every chosen device
functioning and sitting in a context that matches a colocation pattern.
The search is exhaustive (exponential in the worst case), which is fine at
room scale: candidates are the atomic devices, typically a few dozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .context import ContextPattern, DeviceKind, matches, parse_pattern
from .kb import EntityId, KBError, KnowledgeBase
from .schema import HardwareKind, component_closure, effective_view, hardware_ids
from .vocab import SC

Requirement = tuple[EntityId, DeviceKind]


class NotComposite(KBError):
    pass


class NoCover(KBError):
    """Some requirements have no usable device at all."""

    def __init__(self, missing: set[Requirement]):
        self.missing = frozenset(missing)
        names = ", ".join(f"{c}/{k.value}" for c, k in sorted(self.missing))
        super().__init__(f"no device covers: {names}")


@dataclass(frozen=True)
class CompositeSpec:
    name: str
    required: frozenset[Requirement]
    colocate: ContextPattern = ContextPattern()

    def __post_init__(self) -> None:
        req = frozenset((c, DeviceKind(k)) for c, k in self.required)
        if not req:
            raise ValueError("a composite spec needs at least one requirement")
        if any(k is DeviceKind.ANY for _, k in req):
            raise ValueError("requirements name a concrete kind (sensor or actuator)")
        object.__setattr__(self, "required", req)


@dataclass(frozen=True)
class VirtualComposite:
    spec: CompositeSpec
    assignment: dict[Requirement, EntityId]

    @property
    def devices(self) -> tuple[EntityId, ...]:
        return tuple(sorted(set(self.assignment.values())))


def decompose(kb: KnowledgeBase, composite: EntityId) -> list[EntityId]:
    """All components, transitively, sorted; the composite itself excluded."""
    if not kb.is_instance_of(composite, SC.CompositeHardware):
        raise NotComposite(f"{composite} is not CompositeHardware")
    return component_closure(kb, composite)


def candidates(kb: KnowledgeBase, spec: CompositeSpec) -> dict[Requirement, list[EntityId]]:
    """Usable atomic devices per requirement, sorted by id."""
    out: dict[Requirement, list[EntityId]] = {r: [] for r in spec.required}
    for hw in hardware_ids(kb):
        rec = effective_view(kb, hw)
        if rec.kind is HardwareKind.COMPOSITE or not rec.functioning:
            continue
        if not matches(spec.colocate, rec.context):
            continue
        for cap, kind in spec.required:
            if cap in rec.capabilities and rec.kind.value.lower() == kind.value:
                out[(cap, kind)].append(hw)
    return out


def recompose(kb: KnowledgeBase, spec: CompositeSpec) -> VirtualComposite:
    """Minimum-device assignment covering ``spec``.

    Among equally small device sets the lexicographically smallest sorted id
    tuple wins; within the winning set each requirement takes the smallest
    id able to serve it.
    """
    cands = candidates(kb, spec)
    missing = {r for r, devs in cands.items() if not devs}
    if missing:
        raise NoCover(missing)
    serves: dict[EntityId, set[Requirement]] = {}
    for r, devs in cands.items():
        for d in devs:
            serves.setdefault(d, set()).add(r)
    pool = sorted(serves)
    need = set(spec.required)
    for size in range(1, len(need) + 1):
        # combinations() walks sorted tuples in lexicographic order
        for combo in combinations(pool, size):
            covered = set().union(*(serves[d] for d in combo))
            if covered >= need:
                assignment = {r: min(d for d in combo if r in serves[d]) for r in need}
                return VirtualComposite(spec, assignment)
    raise AssertionError("unreachable: every requirement has a candidate")


def spec_from_json(data: dict) -> CompositeSpec:
    """Build a spec from ``{"name", "required": [{"capability", "kind"}], "colocate"}``.

    ``colocate`` is a pattern literal string (see :func:`ambiont.context.parse_pattern`).
    """
    required = frozenset(
        (EntityId.parse(r["capability"]), DeviceKind(r["kind"].lower()))
        for r in data["required"]
    )
    return CompositeSpec(data.get("name", "composite"), required,
                         parse_pattern(data.get("colocate", "")))
