"""Deterministic discrete-event simulation of the fall-assistance scenario.

Events are processed strictly one at a time in ``(t, phase, order)`` order:
scripted events at time ``t`` (in file order) come before timers due at
``t``, so a button press landing exactly on the cancel deadline still
counts.  Agents are visited in id order.

Fall detection is not hard-coded: a :class:`DeductionRule` turns sensor
readings into a deduced ``Fall`` activity, which then drives each assisting
agent's state machine (:func:`assistance_behavior`).
"""

from __future__ import annotations

import enum
import heapq
import json
import operator
import os
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Optional, Union

from . import __version__
from .context import ContextRecord, DeviceKind
from .goals import BindingReport, GoalNode, Verb, DeviceAction, evaluate, goals_from_kb
from .kb import EntityId, KBError, KnowledgeBase, Literal, instance, rel, val
from .schema import component_closure, context_axioms, effective_view, offers, parent_of
from .text import Document, ParseError, load_file
from .vocab import SC

# -- configuration ----------------------------------------------------------


class EscalationMode(str, enum.Enum):
    FALLBACK = "Fallback"  # emergency only if no caregiver acknowledges
    BOTH = "Both"  # emergency alongside the caregiver notification


@dataclass(frozen=True)
class AssistanceConfig:
    # default windows are tuning values, not taken from any measurement
    cancel_window_ms: int = 30000
    caregiver_ack_window_ms: int = 60000
    escalation_mode: EscalationMode = EscalationMode.FALLBACK

    def __post_init__(self) -> None:
        object.__setattr__(self, "escalation_mode", EscalationMode(self.escalation_mode))
        if self.cancel_window_ms <= 0 or self.caregiver_ack_window_ms <= 0:
            raise ValueError("assistance windows must be positive")

    def to_json(self) -> dict:
        return {"cancel_window_ms": self.cancel_window_ms,
                "caregiver_ack_window_ms": self.caregiver_ack_window_ms,
                "escalation_mode": self.escalation_mode.value}


# -- activities -------------------------------------------------------------


class ActivityClass(str, enum.Enum):
    SCHEDULED = "Scheduled"
    DEDUCED = "Deduced"
    EXECUTED = "Executed"

    @property
    def class_id(self) -> EntityId:
        return SC(f"{self.value}Activity")


class DeducedAgentSubject(KBError):
    """Deduced activities may only have a person as subject."""


@dataclass(frozen=True)
class ActivityRecord:
    id: int
    subject: EntityId
    action: str
    instrument: Optional[EntityId]
    context: ContextRecord
    cls: ActivityClass

    def shape(self) -> dict:
        """The record minus identity, subject and class."""
        return {"action": self.action, "instrument": self.instrument, "context": self.context}


class ActivityLog:
    """Append-only activity log that mirrors each entry into a KB.

    Written individuals are ``sc:activity_<n>`` with context ``..._ctx``.
    """

    def __init__(self, kb: Optional[KnowledgeBase] = None):
        self.kb = kb
        self.records: list[ActivityRecord] = []

    def record(self, subject: EntityId, action: str, instrument: Optional[EntityId],
               ctx: ContextRecord, cls: ActivityClass) -> ActivityRecord:
        cls = ActivityClass(cls)
        if cls is ActivityClass.DEDUCED and self.kb is not None \
                and not self.kb.is_instance_of(subject, SC.Person):
            raise DeducedAgentSubject(f"deduced activity {action!r} with non-person {subject}")
        rec = ActivityRecord(len(self.records) + 1, subject, action, instrument, ctx, cls)
        if self.kb is not None:
            for ax in activity_axioms(rec):
                self.kb.add_axiom(ax)
        self.records.append(rec)
        return rec


def record_activity(log: ActivityLog, subject: EntityId, action: str,
                    instrument: Optional[EntityId], ctx: ContextRecord,
                    cls: ActivityClass) -> ActivityRecord:
    return log.record(subject, action, instrument, ctx, cls)


def activity_axioms(rec: ActivityRecord) -> list:
    act = SC(f"activity_{rec.id}")
    ctx = SC(f"activity_{rec.id}_ctx")
    out = [instance(act, rec.cls.class_id), rel(act, SC.hasSubject, rec.subject),
           val(act, SC.actionName, rec.action)]
    if rec.instrument is not None:
        out.append(rel(act, SC.hasInstrument, rec.instrument))
    if rec.context.time is not None:
        out.append(val(act, SC.timestamp, rec.context.time[0]))
    out += context_axioms(ctx, rec.context)
    out.append(rel(act, SC.hasContext, ctx))
    return out


# -- deduction --------------------------------------------------------------

_COMPARATORS = {">=": operator.ge, ">": operator.gt, "<=": operator.le, "<": operator.lt}


@dataclass(frozen=True)
class DeductionRule:
    """Spike-then-quiet detector over one capability's readings.

    An episode starts on a reading satisfying ``comparator threshold``; it
    fires once, ``quiet_ms`` later, unless a breaking reading arrives in the
    meantime.  A reading breaks the episode when its value exceeds
    ``quiet_threshold`` (or, with no quiet threshold, when it would start a
    new episode itself).  Readings are tracked per device.
    """

    id: str
    capability: EntityId
    threshold: Decimal
    comparator: str = ">="
    quiet_ms: int = 0
    quiet_threshold: Optional[Decimal] = None
    action: str = "Fall"

    def __post_init__(self) -> None:
        if self.comparator not in _COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.quiet_ms < 0:
            raise ValueError("quiet period must be >= 0")

    def triggers(self, value) -> bool:
        return _COMPARATORS[self.comparator](Decimal(value), self.threshold)

    def breaks(self, value) -> bool:
        if self.quiet_threshold is None:
            return self.triggers(value)
        return Decimal(value) > self.quiet_threshold

    @classmethod
    def from_json(cls, data: dict) -> DeductionRule:
        qt = data.get("quiet_threshold")
        return cls(
            id=str(data["id"]),
            capability=EntityId.parse(data["capability"]),
            threshold=Decimal(str(data["threshold"])),
            comparator=data.get("comparator", ">="),
            quiet_ms=int(data.get("quiet_ms", 0)),
            quiet_threshold=Decimal(str(qt)) if qt is not None else None,
            action=data.get("action", "Fall"),
        )


@dataclass(frozen=True)
class Firing:
    rule: DeductionRule
    device: EntityId
    started: int
    t: int


class Deducer:
    """Incremental evaluation of deduction rules."""

    def __init__(self, rules: list[DeductionRule]):
        self.rules = list(rules)
        self._pending: dict[tuple[str, EntityId], int] = {}

    def observe(self, t: int, device: EntityId, capability: EntityId, value) -> list[int]:
        """Feed one reading; returns deadlines of episodes it opened."""
        opened = []
        for rule in self.rules:
            if rule.capability != capability:
                continue
            key = (rule.id, device)
            if key in self._pending and rule.breaks(value):
                del self._pending[key]
            if rule.triggers(value):
                self._pending[key] = t
                opened.append(t + rule.quiet_ms)
        return opened

    def advance(self, t: Optional[int] = None) -> list[Firing]:
        """Fire every episode whose quiet period has elapsed by ``t`` (None: all)."""
        by_id = {r.id: r for r in self.rules}
        due = []
        for (rid, device), started in self._pending.items():
            fire_at = started + by_id[rid].quiet_ms
            if t is None or fire_at <= t:
                due.append(Firing(by_id[rid], device, started, fire_at))
        for f in due:
            del self._pending[(f.rule.id, f.device)]
        return sorted(due, key=lambda f: (f.t, f.rule.id, f.device))

    def forget(self, devices) -> None:
        devices = set(devices)
        for key in [k for k in self._pending if k[1] in devices]:
            del self._pending[key]


def deduction_subject(kb: KnowledgeBase, device: EntityId) -> Optional[EntityId]:
    """The person a device's context is about: an assisted person first."""
    ctx = effective_view(kb, device).context
    users = sorted(ctx.users) if ctx is not None else []
    persons = [u for u in users if kb.is_instance_of(u, SC.Person)]
    assisted = [u for u in persons if kb.is_instance_of(u, SC.Assisted)]
    return (assisted or persons or [None])[0]


def deduced_context(kb: KnowledgeBase, firing: Firing, subject: EntityId) -> ContextRecord:
    ctx = effective_view(kb, firing.device).context
    users = (ctx.users if ctx is not None else frozenset()) | {subject}
    return ContextRecord(ctx.location if ctx is not None else None, users,
                         None, (firing.started, firing.t))


def deduce(rules: list[DeductionRule], events: list, kb: KnowledgeBase,
           until: Optional[int] = None) -> list[ActivityRecord]:
    """Deduced activities produced by ``rules`` over a window of readings.

    ``events`` are :class:`ScenarioEvent` objects; only SensorReading ones
    are considered.  Episodes still in their quiet period at ``until`` do not
    fire (``until=None`` lets every open episode complete).
    """
    deducer = Deducer(rules)
    log = ActivityLog()
    firings: list[Firing] = []
    readings = sorted((e for e in events if e.kind is EventKind.SENSOR_READING),
                      key=lambda e: (e.t, e.order))
    for e in readings:
        if until is not None and e.t > until:
            break
        firings += [f for f in deducer.advance(e.t - 1)]
        deducer.observe(e.t, e.entity("device"), e.entity("capability"), e.args["value"])
        firings += deducer.advance(e.t)
    firings += deducer.advance(until)
    for f in firings:
        subject = deduction_subject(kb, f.device)
        if subject is not None:
            log.record(subject, f.rule.action, f.device, deduced_context(kb, f, subject),
                       ActivityClass.DEDUCED)
    return log.records


# -- scenario events --------------------------------------------------------


class EventKind(str, enum.Enum):
    SENSOR_READING = "SensorReading"
    DEVICE_FAILURE = "DeviceFailure"
    DEVICE_RECOVERY = "DeviceRecovery"
    BUTTON_PRESS = "ButtonPress"
    CAREGIVER_ACK = "CaregiverAck"
    AGENDA_ENTRY = "AgendaEntry"
    MESSAGE = "Message"


_EVENT_FIELDS: dict[EventKind, dict[str, str]] = {
    EventKind.SENSOR_READING: {"device": "Hardware", "capability": "Capability", "value": "number"},
    EventKind.DEVICE_FAILURE: {"device": "Hardware"},
    EventKind.DEVICE_RECOVERY: {"device": "Hardware"},
    EventKind.BUTTON_PRESS: {"device": "Hardware", "user": "User"},
    EventKind.CAREGIVER_ACK: {"user": "User"},
    EventKind.AGENDA_ENTRY: {"user": "User", "label": "string", "t_start": "int", "t_end": "int"},
    EventKind.MESSAGE: {"from": "User", "to": "User", "message": "string"},
}


@dataclass(frozen=True)
class ScenarioEvent:
    t: int
    kind: EventKind
    args: dict = field(hash=False)
    order: int = 0

    def entity(self, name: str) -> EntityId:
        return EntityId.parse(self.args[name])

    @classmethod
    def make(cls, t: int, kind: Union[EventKind, str], order: int = 0, **args) -> ScenarioEvent:
        return cls(t, EventKind(kind), args, order)


class ScenarioError(Exception):
    def __init__(self, message: str, where: str = "", line: int = 0, column: int = 0):
        self.where = where
        self.line = line
        self.column = column
        pos = f"{line}:{column}: " if line else ""
        loc = f"{where}: " if where else ""
        super().__init__(f"{pos}{loc}{message}")


class LoadError(Exception):
    pass


@dataclass
class Scenario:
    world: str
    config: AssistanceConfig = field(default_factory=AssistanceConfig)
    rules: list[DeductionRule] = field(default_factory=list)
    events: list[ScenarioEvent] = field(default_factory=list)
    expect: list[dict] = field(default_factory=list)
    source: Optional[str] = None

    def world_path(self) -> str:
        if self.source is None or os.path.isabs(self.world):
            return self.world
        return os.path.join(os.path.dirname(self.source), self.world)


_TOP_KEYS = {"world", "config", "rules", "events", "expect"}


def scenario_from_json(data: Any, source: Optional[str] = None) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown keys {sorted(unknown)}")
    if not isinstance(data.get("world"), str):
        raise ScenarioError("'world' must be a path string", "world")
    try:
        config = AssistanceConfig(**data.get("config", {}))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), "config") from None
    rules = []
    for i, r in enumerate(data.get("rules", [])):
        try:
            rules.append(DeductionRule.from_json(r))
        except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
            raise ScenarioError(f"bad rule: {exc}", f"rules[{i}]") from None
    events = []
    for i, e in enumerate(data.get("events", [])):
        where = f"events[{i}]"
        if not isinstance(e, dict):
            raise ScenarioError("event must be an object", where)
        try:
            kind = EventKind(e.get("kind"))
        except ValueError:
            raise ScenarioError(f"unknown event kind {e.get('kind')!r}", where) from None
        t = e.get("t")
        if not isinstance(t, int) or isinstance(t, bool) or t < 0:
            raise ScenarioError("t must be a non-negative integer", where)
        args = {k: v for k, v in e.items() if k not in ("t", "kind")}
        missing = set(_EVENT_FIELDS[kind]) - set(args)
        if missing:
            raise ScenarioError(f"{kind.value} needs {sorted(missing)}", where)
        events.append(ScenarioEvent(t, kind, args, i))
    expect = data.get("expect", [])
    for i, x in enumerate(expect):
        if not isinstance(x, dict) or ("present" in x) == ("absent" in x):
            raise ScenarioError("expectation needs exactly one of present/absent", f"expect[{i}]")
    return Scenario(data["world"], config, rules, events, expect, source)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh, parse_float=Decimal)
    except OSError as exc:
        raise LoadError(f"cannot read scenario {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, path, exc.lineno, exc.colno) from None
    return scenario_from_json(data, source=path)


def check_events(kb: KnowledgeBase, events: list[ScenarioEvent]) -> None:
    for e in events:
        where = f"events[{e.order}]"
        for name, expected in _EVENT_FIELDS[e.kind].items():
            value = e.args[name]
            if expected == "number":
                if isinstance(value, bool) or not isinstance(value, (int, Decimal, float)):
                    raise ScenarioError(f"{name} must be a number", where)
            elif expected == "int":
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ScenarioError(f"{name} must be an integer", where)
            elif expected == "string":
                if not isinstance(value, str):
                    raise ScenarioError(f"{name} must be a string", where)
            else:
                try:
                    eid = EntityId.parse(value)
                except (ValueError, TypeError, AttributeError):
                    raise ScenarioError(f"{name} must be an entity id", where) from None
                if not kb.is_instance_of(eid, SC(expected)):
                    raise ScenarioError(f"{name} {eid} is not a known {expected}", where)


# -- assistance state machine -----------------------------------------------


@dataclass(frozen=True)
class Idle:
    pass


@dataclass(frozen=True)
class CancelWindow:
    deadline: int
    assisted: EntityId
    cancellable: bool


@dataclass(frozen=True)
class SeekingCaregiver:
    deadline: int
    assisted: EntityId
    caregiver: EntityId


@dataclass(frozen=True)
class Done:
    pass


AssistanceState = Union[Idle, CancelWindow, SeekingCaregiver, Done]


@dataclass(frozen=True)
class FallDeduced:
    t: int
    subject: EntityId
    cancel_available: bool


@dataclass(frozen=True)
class Press:
    t: int
    user: EntityId


@dataclass(frozen=True)
class Deadline:
    t: int
    caregiver: Optional[EntityId] = None  # best contact target at that moment


@dataclass(frozen=True)
class Ack:
    t: int
    user: EntityId


@dataclass(frozen=True)
class Emit:
    kind: str
    target: Optional[EntityId] = None


def assistance_behavior(state: AssistanceState, event, config: AssistanceConfig
                        ) -> tuple[AssistanceState, list[Emit]]:
    """One step of an assistance agent; events that do not apply are ignored."""
    if isinstance(state, Idle) and isinstance(event, FallDeduced):
        nxt = CancelWindow(event.t + config.cancel_window_ms, event.subject, event.cancel_available)
        return nxt, [Emit("CancelOffered" if event.cancel_available else "CancelUnavailable",
                          event.subject)]
    if isinstance(state, CancelWindow):
        if isinstance(event, Press) and state.cancellable and event.user == state.assisted \
                and event.t <= state.deadline:
            return Idle(), [Emit("AssistanceCancelled", state.assisted)]
        if isinstance(event, Deadline) and event.t == state.deadline:
            both = config.escalation_mode is EscalationMode.BOTH
            if event.caregiver is None:
                return Done(), [Emit("NotifyEmergency", state.assisted)]
            emits = [Emit("NotifyCaregiver", event.caregiver)]
            if both:
                emits.append(Emit("NotifyEmergency", state.assisted))
            return SeekingCaregiver(event.t + config.caregiver_ack_window_ms, state.assisted,
                                    event.caregiver), emits
    if isinstance(state, SeekingCaregiver):
        if isinstance(event, Ack) and event.user == state.caregiver:
            return Done(), [Emit("CaregiverResponded", event.user)]
        if isinstance(event, Deadline) and event.t == state.deadline:
            if config.escalation_mode is EscalationMode.BOTH:
                return Done(), []
            return Done(), [Emit("NotifyEmergency", state.assisted)]
    return state, []


# -- trace ------------------------------------------------------------------

Payload = dict[str, Union[str, int, bool]]


@dataclass(frozen=True)
class TraceRecord:
    t: int
    seq: int
    emitter: EntityId
    kind: str
    payload: Payload = field(default_factory=dict, hash=False)

    def to_json(self) -> dict:
        return {"t": self.t, "emitter": str(self.emitter), "kind": self.kind,
                "payload": self.payload}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


ENGINE = EntityId("sim", "engine")
DEDUCER = EntityId("sim", "deducer")


@dataclass
class Verdict:
    expectation: dict
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {_dumps(self.expectation)} {self.detail}"


@dataclass
class RunResult:
    header: dict
    trace: list[TraceRecord]
    activities: list[ActivityRecord]
    verdicts: list[Verdict]
    kb: KnowledgeBase

    @property
    def ok(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def trace_lines(self) -> list[str]:
        return [_dumps(self.header)] + [_dumps(r.to_json()) for r in self.trace]

    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace_lines())

    def of_kind(self, kind: str) -> list[TraceRecord]:
        return [r for r in self.trace if r.kind == kind]


def check_expectations(trace: list[TraceRecord], expect: list[dict]) -> list[Verdict]:
    """``{"present": k}`` / ``{"absent": k}``, optionally pinned to ``t`` and,
    for present, an exact ``count``."""
    out = []
    for x in expect:
        kind = x.get("present", x.get("absent"))
        hits = [r for r in trace if r.kind == kind and ("t" not in x or r.t == x["t"])]
        if "absent" in x:
            ok = not hits
            detail = "ok" if ok else f"found at t={[r.t for r in hits]}"
        elif "count" in x:
            ok = len(hits) == x["count"]
            detail = f"count={len(hits)}"
        else:
            ok = bool(hits)
            seen = [r.t for r in trace if r.kind == kind]
            detail = "ok" if ok else f"not found (seen at t={seen})"
        out.append(Verdict(dict(x), ok, detail))
    return out


# -- the engine -------------------------------------------------------------


@dataclass
class _AgentRun:
    id: EntityId
    goals: list[GoalNode]
    assisted: list[EntityId]
    reports: dict[EntityId, BindingReport] = field(default_factory=dict)
    states: dict[EntityId, AssistanceState] = field(default_factory=dict)


class Simulation:
    """One isolated run; all mutable state lives on the instance."""

    def __init__(self, world: Document, scenario: Scenario, config: AssistanceConfig, seed: int):
        self.scenario = scenario
        self.config = config
        self.seed = seed
        try:
            self.kb = world.to_kb()
        except KBError as exc:
            raise LoadError(f"world does not load: {exc}") from None
        check_events(self.kb, scenario.events)
        for rule in scenario.rules:
            if not self.kb.is_instance_of(rule.capability, SC.Capability):
                raise ScenarioError(f"unknown capability {rule.capability}", f"rule {rule.id}")
        self.log = ActivityLog(self.kb)
        self.deducer = Deducer(scenario.rules)
        self.trace: list[TraceRecord] = []
        self._queue: list[tuple] = []
        self._seq = 0
        self.agents: list[_AgentRun] = []
        for a in self.kb.instances_of(SC.Agent):
            try:
                goals = goals_from_kb(self.kb, a)
            except KBError as exc:
                raise LoadError(f"goals of {a}: {exc}") from None
            assisted = self.kb.property_values(a, SC.assists)
            self.agents.append(_AgentRun(a, goals, assisted,
                                         states={p: Idle() for p in assisted}))

    # plumbing

    def _emit(self, t: int, emitter: EntityId, kind: str, **payload) -> None:
        clean = {k: (str(v) if isinstance(v, (EntityId, Decimal, Literal)) else v)
                 for k, v in payload.items() if v is not None}
        self.trace.append(TraceRecord(t, len(self.trace), emitter, kind, clean))

    def _push(self, t: int, phase: int, item) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (t, phase, self._seq, item))

    def _goal(self, agent: _AgentRun, role: str) -> Optional[GoalNode]:
        for tree in agent.goals:
            node = tree.find_role(role)
            if node is not None:
                return node
        return None

    def _plan(self, t: int, initial: bool = False) -> None:
        for agent in self.agents:
            for tree in agent.goals:
                report = evaluate(self.kb, tree)
                old = agent.reports.get(tree.id)
                agent.reports[tree.id] = report
                if initial or old is None or old.bindings != report.bindings \
                        or old.satisfiable != report.satisfiable:
                    self._emit(t, agent.id, "PlanEvaluated" if initial else "PlanRebound",
                               goal=tree.id, satisfiable=report.satisfiable,
                               bindings=",".join(f"{g}={d}" for g, d
                                                 in sorted(report.bindings.items())))

    def _observers(self, capability: EntityId) -> set[EntityId]:
        """Devices some agent currently observes ``capability`` through."""
        out = set()
        for agent in self.agents:
            for tree in agent.goals:
                report = agent.reports.get(tree.id)
                for leaf in tree.leaves():
                    a = leaf.action
                    if isinstance(a, DeviceAction) and a.verb is Verb.OBSERVE \
                            and a.capability == capability and leaf.id in report.bindings:
                        out.add(report.bindings[leaf.id])
        return out

    def _perceived(self, device: EntityId, capability: EntityId) -> bool:
        if not effective_view(self.kb, device).functioning:
            return False
        watched = self._observers(capability)
        node: Optional[EntityId] = device
        seen = set()
        while node is not None and node not in seen:
            if node in watched:
                return True
            seen.add(node)
            node = parent_of(self.kb, node)
        return False

    def _now_ctx(self, t: int, *users: EntityId) -> ContextRecord:
        return ContextRecord(users=frozenset(u for u in users if u is not None), time=(t, t))

    # event handlers

    def _on_event(self, e: ScenarioEvent) -> None:
        t = e.t
        if e.kind is EventKind.SENSOR_READING:
            device, cap = e.entity("device"), e.entity("capability")
            perceived = self._perceived(device, cap)
            self._emit(t, device, e.kind.value, capability=cap,
                       value=str(e.args["value"]), perceived=perceived)
            if perceived:
                for deadline in self.deducer.observe(t, device, cap, e.args["value"]):
                    self._push(deadline, 1, ("deduce",))
        elif e.kind in (EventKind.DEVICE_FAILURE, EventKind.DEVICE_RECOVERY):
            device = e.entity("device")
            failed = e.kind is EventKind.DEVICE_FAILURE
            self.kb.replace_values(device, SC.isFunctioning, [not failed])
            self._emit(t, device, e.kind.value)
            if failed:
                self.deducer.forget([device, *component_closure(self.kb, device)])
            self._plan(t)
        elif e.kind is EventKind.BUTTON_PRESS:
            device, user = e.entity("device"), e.entity("user")
            rec = effective_view(self.kb, device)
            valid = rec.functioning and offers(self.kb, rec, SC.ButtonInput, DeviceKind.SENSOR)
            self._emit(t, user, e.kind.value, device=device, valid=valid)
            if not valid:
                return
            if self.kb.is_instance_of(user, SC.Person):
                self.log.record(user, "PressButton", device, self._now_ctx(t, user),
                                ActivityClass.DEDUCED)
            self._deliver(Press(t, user))
        elif e.kind is EventKind.CAREGIVER_ACK:
            user = e.entity("user")
            self._emit(t, user, e.kind.value)
            self._deliver(Ack(t, user))
        elif e.kind is EventKind.AGENDA_ENTRY:
            user = e.entity("user")
            span = (e.args["t_start"], e.args["t_end"])
            try:
                ctx = ContextRecord(users=frozenset({user}), time=span)
            except ValueError as exc:
                raise ScenarioError(str(exc), f"events[{e.order}]") from None
            rec = self.log.record(user, e.args["label"], None, ctx, ActivityClass.SCHEDULED)
            self._emit(t, user, e.kind.value, label=e.args["label"], activity=rec.id)
        elif e.kind is EventKind.MESSAGE:
            sender, to = e.entity("from"), e.entity("to")
            payload = e.args.get("payload") or {}
            self._emit(t, sender, e.kind.value, to=to, message=e.args["message"],
                       body=_dumps(payload) if payload else None)
            cls = (ActivityClass.EXECUTED if self.kb.is_instance_of(sender, SC.Agent)
                   else ActivityClass.DEDUCED)
            # context is the recipient only, so the record shape does not depend on who sent it
            self.log.record(sender, e.args["message"], None, self._now_ctx(t, to), cls)

    def _on_deduce(self, t: int) -> None:
        for f in self.deducer.advance(t):
            subject = deduction_subject(self.kb, f.device)
            if subject is None:
                self._emit(t, DEDUCER, "DeductionUnresolved", rule=f.rule.id, device=f.device)
                continue
            rec = self.log.record(subject, f.rule.action, f.device,
                                  deduced_context(self.kb, f, subject), ActivityClass.DEDUCED)
            self._emit(t, DEDUCER, "ActivityDeduced", rule=f.rule.id, action=f.rule.action,
                       subject=subject, device=f.device, activity=rec.id)
            if f.rule.action == "Fall":
                self._on_fall(t, subject)

    def _on_fall(self, t: int, subject: EntityId) -> None:
        for agent in self.agents:
            if subject not in agent.states:
                continue
            offer = self._goal(agent, "offer-cancel")
            report = evaluate(self.kb, offer) if offer is not None else None
            available = bool(report and report.satisfiable)
            self._step(agent, subject, FallDeduced(t, subject, available), report)

    def _deliver(self, event) -> None:
        for agent in self.agents:
            for person in sorted(agent.states):
                self._step(agent, person, event)

    def _on_timer(self, t: int, agent_id: EntityId, person: EntityId) -> None:
        agent = next(a for a in self.agents if a.id == agent_id)
        state = agent.states[person]
        caregiver = None
        if isinstance(state, CancelWindow) and state.deadline == t:
            goal = self._goal(agent, "notify-caregiver")
            if goal is not None:
                report = evaluate(self.kb, goal)
                if report.satisfiable:
                    caregiver = report.bindings[goal.leaves()[0].id]
        self._step(agent, person, Deadline(t, caregiver))

    def _step(self, agent: _AgentRun, person: EntityId, event,
              offer: Optional[BindingReport] = None) -> None:
        before = agent.states[person]
        after, emits = assistance_behavior(before, event, self.config)
        agent.states[person] = after
        t = event.t
        for em in emits:
            self._act(agent, person, t, em, offer)
        deadline = getattr(after, "deadline", None)
        if deadline is not None and deadline != getattr(before, "deadline", None):
            self._push(deadline, 1, ("agent", agent.id, person))

    def _act(self, agent: _AgentRun, person: EntityId, t: int, em: Emit,
             offer: Optional[BindingReport]) -> None:
        instrument = None
        extra: dict = {}
        if em.kind == "CancelOffered" and offer is not None:
            shown = sorted(set(offer.bindings.values()))
            extra["devices"] = ",".join(str(d) for d in shown)
            goal = self._goal(agent, "offer-cancel")
            shows = [offer.bindings[leaf.id] for leaf in goal.leaves()
                     if isinstance(leaf.action, DeviceAction) and leaf.action.verb is Verb.ACTUATE]
            instrument = shows[0] if shows else None
        target = em.target if em.target != person else None
        self._emit(t, agent.id, em.kind, person=person, target=target, **extra)
        if em.kind in ("CancelUnavailable", "CaregiverResponded"):
            return
        users = (person, em.target)
        self.log.record(agent.id, em.kind, instrument, self._now_ctx(t, *users),
                        ActivityClass.EXECUTED)

    def run(self) -> RunResult:
        for e in sorted(self.scenario.events, key=lambda e: (e.t, e.order)):
            self._push(e.t, 0, ("event", e))
        self._plan(0, initial=True)
        while self._queue:
            t, _, _, item = heapq.heappop(self._queue)
            if item[0] == "event":
                self._on_event(item[1])
            elif item[0] == "deduce":
                self._on_deduce(t)
            else:
                self._on_timer(t, item[1], item[2])
        verdicts = check_expectations(self.trace, self.scenario.expect)
        header = {"format": "ambiont-trace", "version": __version__, "seed": self.seed,
                  "config": self.config.to_json()}
        return RunResult(header, self.trace, self.log.records, verdicts, self.kb)


def run(world: Document, scenario: Scenario, config: Optional[AssistanceConfig] = None,
        seed: int = 0) -> RunResult:
    """Run ``scenario`` against ``world``; deterministic for fixed inputs.

    ``seed`` is recorded in the trace header; no behavior is randomized yet.
    """
    return Simulation(world, scenario, config or scenario.config, seed).run()


def run_file(path: str, seed: int = 0) -> RunResult:
    scenario = load_scenario(path)
    try:
        world = load_file(scenario.world_path())
    except OSError as exc:
        raise LoadError(f"cannot read world {scenario.world_path()}: {exc}") from None
    except ParseError as exc:
        raise LoadError(f"world {scenario.world_path()} does not parse:\n{exc}") from None
    return run(world, scenario, seed=seed)
