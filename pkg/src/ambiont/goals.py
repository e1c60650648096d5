"""Agent goal trees and their satisfiability against the current world.

A goal is a leaf action (use a device capability, or contact a person) or
an AND/OR over sub-goals.  A device leaf holds when some functioning device
offers the capability in a context validating the leaf's pattern; a contact
leaf holds when some person fits the target filter.  Leaves bind
independently, so two leaves may share a device.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .context import ContextPattern, DeviceKind, find_devices
from .kb import EntityId, KBError, KnowledgeBase, instance, rel, val
from .schema import PersonRole, RelationFunction, WrongClass, context_axioms, read_pattern, relations_of
from .vocab import SC


class GoalError(KBError):
    pass


class MalformedTree(GoalError):
    pass


class CyclicGoalGraph(GoalError):
    pass


class DanglingLeaf(GoalError):
    pass


class Verb(str, enum.Enum):
    OBSERVE = "observe"
    ACTUATE = "actuate"

    @property
    def kind(self) -> DeviceKind:
        return DeviceKind.SENSOR if self is Verb.OBSERVE else DeviceKind.ACTUATOR


@dataclass(frozen=True)
class DeviceAction:
    capability: EntityId
    verb: Verb
    pattern: ContextPattern = ContextPattern()

    def __post_init__(self) -> None:
        object.__setattr__(self, "verb", Verb(self.verb))

    @property
    def kind(self) -> DeviceKind:
        return self.verb.kind


@dataclass(frozen=True)
class ContactAction:
    """Reach a person: filter by role and, optionally, by the functions of
    their social relation with ``related_to``."""

    message_kind: str
    role: Optional[PersonRole] = None
    functions: frozenset[RelationFunction] = frozenset()
    related_to: Optional[EntityId] = None

    def __post_init__(self) -> None:
        if self.role is not None:
            object.__setattr__(self, "role", PersonRole(self.role))
        object.__setattr__(self, "functions",
                           frozenset(RelationFunction(f) for f in self.functions))
        if self.functions and self.related_to is None:
            raise ValueError("a relation-function filter needs related_to")


ActionSpec = Union[DeviceAction, ContactAction]


class Op(str, enum.Enum):
    LEAF = "leaf"
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class GoalNode:
    id: EntityId
    label: str
    op: Op = Op.LEAF
    action: Optional[ActionSpec] = None
    children: tuple[GoalNode, ...] = ()
    role: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "op", Op(self.op))
        object.__setattr__(self, "children", tuple(self.children))

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self) -> list[GoalNode]:
        return [n for n in self.walk() if n.op is Op.LEAF]

    def find_role(self, role: str) -> Optional[GoalNode]:
        return next((n for n in self.walk() if n.role == role), None)


def leaf(id: EntityId, label: str, action: ActionSpec, role: Optional[str] = None) -> GoalNode:
    return GoalNode(id, label, Op.LEAF, action, (), role)


def all_of(id: EntityId, label: str, *children: GoalNode, role: Optional[str] = None) -> GoalNode:
    return GoalNode(id, label, Op.AND, None, children, role)


def any_of(id: EntityId, label: str, *children: GoalNode, role: Optional[str] = None) -> GoalNode:
    return GoalNode(id, label, Op.OR, None, children, role)


def validate_tree(root: GoalNode) -> None:
    ids: set[EntityId] = set()
    labels: set[str] = set()
    for node in root.walk():
        if node.id in ids:
            raise MalformedTree(f"goal {node.id} appears twice")
        if node.label in labels:
            raise MalformedTree(f"duplicate goal label {node.label!r}")
        ids.add(node.id)
        labels.add(node.label)
        if node.op is Op.LEAF:
            if node.action is None or node.children:
                raise MalformedTree(f"leaf {node.id} needs an action and no children")
        elif not node.children or node.action is not None:
            raise MalformedTree(f"{node.op.value} goal {node.id} needs children and no action")


@dataclass
class BindingReport:
    satisfiable: bool
    bindings: dict[EntityId, EntityId] = field(default_factory=dict)
    unsatisfied: list[tuple[EntityId, str]] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"satisfiable={'true' if self.satisfiable else 'false'}"]
        out += [f"bind {g} -> {e}" for g, e in sorted(self.bindings.items())]
        out += [f"unsatisfied {g}: {why}" for g, why in self.unsatisfied]
        return out

    def to_json(self) -> dict:
        return {
            "satisfiable": self.satisfiable,
            "bindings": {str(g): str(e) for g, e in sorted(self.bindings.items())},
            "unsatisfied": [{"goal": str(g), "reason": why} for g, why in self.unsatisfied],
        }


def contact_targets(kb: KnowledgeBase, action: ContactAction) -> list[EntityId]:
    """Persons fitting the contact filter, related ones first, then by id."""
    related: dict[EntityId, set[RelationFunction]] = {}
    if action.related_to is not None:
        for r in relations_of(kb, action.related_to):
            other = r.target if r.source == action.related_to else r.source
            related.setdefault(other, set()).update(r.functions)
    out = []
    for person in kb.instances_of(SC.Person):
        if person == action.related_to:
            continue
        if action.role is not None and not kb.is_instance_of(person, SC(action.role.value)):
            continue
        if action.functions and not action.functions <= related.get(person, set()):
            continue
        out.append((person not in related, person))
    return [p for _, p in sorted(out)]


def leaf_candidates(kb: KnowledgeBase, action: ActionSpec) -> list[EntityId]:
    if isinstance(action, DeviceAction):
        return find_devices(kb, action.pattern, action.capability, action.kind)
    return contact_targets(kb, action)


def _why(action: ActionSpec) -> str:
    if isinstance(action, DeviceAction):
        return f"no functioning {action.kind.value} offering {action.capability} in context"
    role = action.role.value if action.role else "person"
    return f"no {role} to contact"


def evaluate(kb: KnowledgeBase, root: GoalNode) -> BindingReport:
    """Decide ``root`` and report witnesses.

    AND reports the bindings and failures of all children; a satisfied OR
    reports only its first satisfiable child (the witness), an unsatisfied
    OR reports all of them.
    """
    validate_tree(root)

    def go(node: GoalNode) -> BindingReport:
        if node.op is Op.LEAF:
            found = leaf_candidates(kb, node.action)
            if found:
                return BindingReport(True, {node.id: found[0]})
            return BindingReport(False, {}, [(node.id, _why(node.action))])
        reports = [go(c) for c in node.children]
        if node.op is Op.OR:
            witness = next((r for r in reports if r.satisfiable), None)
            if witness is not None:
                return witness
        merged = BindingReport(all(r.satisfiable for r in reports))
        for r in reports:
            merged.bindings.update(r.bindings)
            merged.unsatisfied.extend(r.unsatisfied)
        return merged

    return go(root)


# -- persistence in the KB --------------------------------------------------

def _read_action(kb: KnowledgeBase, act: EntityId) -> ActionSpec:
    if kb.is_instance_of(act, SC.DeviceAction):
        cap = kb.first_value(act, SC.requiresCapability)
        verb = kb.first_value(act, SC.verb)
        if cap is None or verb is None:
            raise MalformedTree(f"device action {act} needs a capability and a verb")
        ctx = kb.first_value(act, SC.hasContext)
        pattern = read_pattern(kb, ctx) if ctx is not None else ContextPattern()
        try:
            return DeviceAction(cap, Verb(verb.lexical), pattern)
        except ValueError as exc:
            raise MalformedTree(f"{act}: {exc}") from None
    if kb.is_instance_of(act, SC.ContactAction):
        kind = kb.first_value(act, SC.messageKind)
        role = kb.first_value(act, SC.targetRole)
        try:
            return ContactAction(
                message_kind=kind.lexical if kind is not None else "contact",
                role=PersonRole(role.lexical) if role is not None else None,
                functions=frozenset(f.lexical for f in kb.property_values(act, SC.requiredFunction)),
                related_to=kb.first_value(act, SC.concerns),
            )
        except ValueError as exc:
            raise MalformedTree(f"{act}: {exc}") from None
    raise MalformedTree(f"{act} is neither a DeviceAction nor a ContactAction")


def goal_from_kb(kb: KnowledgeBase, root: EntityId) -> GoalNode:
    def build(node: EntityId, path: frozenset) -> GoalNode:
        children = kb.subjects_of(SC.subGoalOf, node)
        for c in children:
            if c in path:
                raise CyclicGoalGraph(f"goal cycle through {c}")
            if len(kb.property_values(c, SC.subGoalOf)) > 1:
                raise MalformedTree(f"goal {c} has several parents")
        label = kb.first_value(node, SC.label)
        role = kb.first_value(node, SC.goalRole)
        label = label.lexical if label is not None else node.local
        role = role.lexical if role is not None else None
        act = kb.first_value(node, SC.hasAction)
        if not children:
            if act is None:
                raise DanglingLeaf(f"leaf goal {node} has no action")
            return GoalNode(node, label, Op.LEAF, _read_action(kb, act), (), role)
        if act is not None:
            raise MalformedTree(f"goal {node} has both sub-goals and an action")
        comb = kb.first_value(node, SC.combinator)
        try:
            op = Op(comb.lexical) if comb is not None else Op.AND
        except ValueError:
            raise MalformedTree(f"goal {node}: unknown combinator {comb.lexical!r}") from None
        if op is Op.LEAF:
            raise MalformedTree(f"goal {node} has sub-goals but is marked leaf")
        kids = tuple(build(c, path | {c}) for c in children)
        return GoalNode(node, label, op, None, kids, role)

    if kb.first_value(root, SC.subGoalOf) is not None:
        # a root that is itself someone's sub-goal may close a cycle
        seen, cur = {root}, kb.first_value(root, SC.subGoalOf)
        while cur is not None:
            if cur in seen:
                raise CyclicGoalGraph(f"goal cycle through {cur}")
            seen.add(cur)
            cur = kb.first_value(cur, SC.subGoalOf)
    return build(root, frozenset({root}))


def goals_from_kb(kb: KnowledgeBase, agent: EntityId) -> list[GoalNode]:
    """Goal trees of ``agent``, children ordered by id."""
    if not kb.is_instance_of(agent, SC.Agent):
        raise WrongClass(f"{agent} is not an Agent")
    trees = [goal_from_kb(kb, g) for g in kb.property_values(agent, SC.hasGoal)]
    labels = [n.label for t in trees for n in t.walk()]
    if len(labels) != len(set(labels)):
        raise MalformedTree(f"duplicate goal labels for {agent}")
    for t in trees:
        validate_tree(t)
    return trees


def goal_axioms(agent: Optional[EntityId], root: GoalNode) -> list:
    """Axioms persisting ``root`` (and linking it to ``agent`` when given).

    Children are stored unordered; :func:`goal_from_kb` restores them sorted
    by id, so trees built with id-sorted children round-trip exactly.
    """
    validate_tree(root)
    out = []

    def emit(node: GoalNode, parent: Optional[GoalNode]) -> None:
        out.append(instance(node.id, SC.Goal))
        out.append(val(node.id, SC.label, node.label))
        if node.role is not None:
            out.append(val(node.id, SC.goalRole, node.role))
        if parent is not None:
            out.append(rel(node.id, SC.subGoalOf, parent.id))
        if node.op is Op.LEAF:
            out.extend(_action_axioms(node))
        else:
            out.append(val(node.id, SC.combinator, node.op.value))
            for c in node.children:
                emit(c, node)

    emit(root, None)
    if agent is not None:
        out.append(rel(agent, SC.hasGoal, root.id))
    return out


def _action_axioms(node: GoalNode) -> list:
    act = EntityId(node.id.prefix, node.id.local + "_act")
    a = node.action
    out = []
    if isinstance(a, DeviceAction):
        out += [instance(act, SC.DeviceAction),
                rel(act, SC.requiresCapability, a.capability),
                val(act, SC.verb, a.verb.value)]
        if a.pattern != ContextPattern():
            ctx = EntityId(act.prefix, act.local + "_ctx")
            out += context_axioms(ctx, a.pattern)
            out.append(rel(act, SC.hasContext, ctx))
    else:
        out += [instance(act, SC.ContactAction), val(act, SC.messageKind, a.message_kind)]
        if a.role is not None:
            out.append(val(act, SC.targetRole, a.role.value))
        out += [val(act, SC.requiredFunction, f.value) for f in sorted(a.functions)]
        if a.related_to is not None:
            out.append(rel(act, SC.concerns, a.related_to))
    out.append(rel(node.id, SC.hasAction, act))
    return out
