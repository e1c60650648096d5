"""In-memory knowledge base for the ontology subset.

Holds a set of axioms (declarations, subclass links and assertions over
individuals) and answers subsumption, instance and property queries over the
reflexive-transitive subclass closure.  Domain and range declarations are
checked when an assertion is added (closed-world checking), and subclass
cycles among distinct classes are rejected.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from decimal import Decimal
from functools import total_ordering
from typing import Iterable, Iterator, Union

_TOKEN_RE = re.compile(r'^[!#-9;-~]+$')  # printable ASCII minus '"' and ':'


@total_ordering
@dataclass(frozen=True)
class EntityId:
    """A prefixed name, rendered as ``prefix:local``.

    Ordering is lexicographic on the rendered form; every deterministic
    tie-break in the package relies on it.
    """

    prefix: str
    local: str

    def __post_init__(self) -> None:
        for part in (self.prefix, self.local):
            if not isinstance(part, str) or not _TOKEN_RE.match(part):
                raise ValueError(f"invalid entity id component: {part!r}")

    @classmethod
    def parse(cls, text: str) -> EntityId:
        prefix, sep, local = text.partition(":")
        if not sep:
            raise ValueError(f"entity id needs a prefix: {text!r}")
        return cls(prefix, local)

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, EntityId):
            return NotImplemented
        return str(self) < str(other)


class Datatype(str, enum.Enum):
    STRING = "string"
    INTEGER = "integer"
    DECIMAL = "decimal"
    BOOLEAN = "boolean"


_INTEGER_RE = re.compile(r"^-?[0-9]+$")
_DECIMAL_RE = re.compile(r"^-?[0-9]+\.[0-9]+$")


@dataclass(frozen=True)
class Literal:
    """A typed data value that keeps its lexical form.

    Equality is on ``(datatype, lexical)`` so that ``-21.1151`` and
    ``-21.11510`` stay distinct and round-trip exactly.
    """

    datatype: Datatype
    lexical: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "datatype", Datatype(self.datatype))
        lex = self.lexical
        ok = {
            Datatype.STRING: "\n" not in lex and "\r" not in lex,
            Datatype.INTEGER: bool(_INTEGER_RE.match(lex)),
            Datatype.DECIMAL: bool(_DECIMAL_RE.match(lex)),
            Datatype.BOOLEAN: lex in ("true", "false"),
        }[self.datatype]
        if not ok:
            raise ValueError(f"bad {self.datatype.value} lexical form: {lex!r}")

    @classmethod
    def of(cls, value: Union[str, int, bool, Decimal, float]) -> Literal:
        """Build a literal from a Python value (floats go through ``repr``)."""
        if isinstance(value, bool):
            return cls(Datatype.BOOLEAN, "true" if value else "false")
        if isinstance(value, int):
            return cls(Datatype.INTEGER, str(value))
        if isinstance(value, float):
            value = Decimal(repr(value))
        if isinstance(value, Decimal):
            text = format(value, "f")
            if "." not in text:
                text += ".0"
            return cls(Datatype.DECIMAL, text)
        return cls(Datatype.STRING, str(value))

    @property
    def value(self) -> Union[str, int, bool, Decimal]:
        if self.datatype is Datatype.INTEGER:
            return int(self.lexical)
        if self.datatype is Datatype.DECIMAL:
            return Decimal(self.lexical)
        if self.datatype is Datatype.BOOLEAN:
            return self.lexical == "true"
        return self.lexical

    def render(self) -> str:
        """Text form used by the ``.amb`` format."""
        if self.datatype is Datatype.STRING:
            escaped = self.lexical.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return self.lexical

    def __str__(self) -> str:
        return self.render()


class AxiomKind(enum.Enum):
    """Axiom kinds, declared in canonical serialization order."""

    CLASS_DECL = "class"
    OBJ_PROP_DECL = "objprop"
    DATA_PROP_DECL = "dataprop"
    SUBCLASS_OF = "subclass"
    CLASS_ASSERTION = "ind"
    OBJ_PROP_ASSERTION = "rel"
    DATA_PROP_ASSERTION = "val"

    @property
    def rank(self) -> int:
        return _KIND_RANK[self]


_KIND_RANK = {kind: i for i, kind in enumerate(AxiomKind)}

_ARITY = {
    AxiomKind.CLASS_DECL: (EntityId,),
    AxiomKind.OBJ_PROP_DECL: (EntityId, EntityId, EntityId),
    AxiomKind.DATA_PROP_DECL: (EntityId, EntityId, Datatype),
    AxiomKind.SUBCLASS_OF: (EntityId, EntityId),
    AxiomKind.CLASS_ASSERTION: (EntityId, EntityId),
    AxiomKind.OBJ_PROP_ASSERTION: (EntityId, EntityId, EntityId),
    AxiomKind.DATA_PROP_ASSERTION: (EntityId, EntityId, Literal),
}

Value = Union[EntityId, Literal]


@dataclass(frozen=True)
class Axiom:
    """One ontology statement.

    Argument layout per kind:

    ========================  ===================================
    CLASS_DECL                (class,)
    OBJ_PROP_DECL             (property, domain class, range class)
    DATA_PROP_DECL            (property, domain class, Datatype)
    SUBCLASS_OF               (sub, super)
    CLASS_ASSERTION           (individual, class)
    OBJ_PROP_ASSERTION        (subject, property, object)
    DATA_PROP_ASSERTION       (subject, property, Literal)
    ========================  ===================================
    """

    kind: AxiomKind
    args: tuple

    def __post_init__(self) -> None:
        expected = _ARITY[self.kind]
        if len(self.args) != len(expected) or not all(
            isinstance(a, t) for a, t in zip(self.args, expected)
        ):
            raise TypeError(f"bad arguments for {self.kind.value}: {self.args!r}")

    def sort_key(self) -> tuple:
        return (self.kind.rank, tuple(_render_arg(a) for a in self.args))

    def __str__(self) -> str:
        a = [_render_arg(x) for x in self.args]
        k = self.kind
        if k is AxiomKind.OBJ_PROP_DECL or k is AxiomKind.DATA_PROP_DECL:
            return f"{k.value} {a[0]} domain {a[1]} range {a[2]}"
        if k is AxiomKind.CLASS_ASSERTION:
            return f"ind {a[0]} : {a[1]}"
        return " ".join([k.value, *a])


def _render_arg(arg) -> str:
    if isinstance(arg, Datatype):
        return arg.value
    if isinstance(arg, Literal):
        return arg.render()
    return str(arg)


# Convenience constructors; tests and the schema builder use these heavily.

def class_decl(c: EntityId) -> Axiom:
    return Axiom(AxiomKind.CLASS_DECL, (c,))


def objprop_decl(p: EntityId, domain: EntityId, range_: EntityId) -> Axiom:
    return Axiom(AxiomKind.OBJ_PROP_DECL, (p, domain, range_))


def dataprop_decl(p: EntityId, domain: EntityId, datatype: Datatype | str) -> Axiom:
    return Axiom(AxiomKind.DATA_PROP_DECL, (p, domain, Datatype(datatype)))


def subclass(sub: EntityId, sup: EntityId) -> Axiom:
    return Axiom(AxiomKind.SUBCLASS_OF, (sub, sup))


def instance(ind: EntityId, c: EntityId) -> Axiom:
    return Axiom(AxiomKind.CLASS_ASSERTION, (ind, c))


def rel(s: EntityId, p: EntityId, o: EntityId) -> Axiom:
    return Axiom(AxiomKind.OBJ_PROP_ASSERTION, (s, p, o))


def val(s: EntityId, p: EntityId, v) -> Axiom:
    if not isinstance(v, Literal):
        v = Literal.of(v)
    return Axiom(AxiomKind.DATA_PROP_ASSERTION, (s, p, v))


class KBError(Exception):
    """Base class for knowledge-base errors."""


class UndeclaredEntity(KBError):
    def __init__(self, entity: EntityId, role: str = "entity"):
        super().__init__(f"undeclared {role}: {entity}")
        self.entity = entity
        self.role = role


class SubclassCycle(KBError):
    def __init__(self, sub: EntityId, sup: EntityId):
        super().__init__(f"subclass {sub} -> {sup} would create a cycle")
        self.sub = sub
        self.sup = sup


class DomainViolation(KBError):
    pass


class RangeViolation(KBError):
    pass


class DeclarationConflict(KBError):
    """An entity is redeclared incompatibly (e.g. a class reused as an individual)."""


def value_sort_key(v: Value) -> tuple:
    if isinstance(v, EntityId):
        return (0, str(v))
    num = v.value if v.datatype in (Datatype.INTEGER, Datatype.DECIMAL) else 0
    return (1, v.datatype.value, num, v.lexical)


class KnowledgeBase:
    """A mutable axiom set with query indices kept in step on every insert.

    Reads never mutate; a single writer must hold exclusive access while
    calling :meth:`add_axiom` or :meth:`replace_values`.
    """

    def __init__(self, axioms: Iterable[Axiom] = ()):
        self._axioms: set[Axiom] = set()
        self._classes: set[EntityId] = set()
        self._objprops: dict[EntityId, tuple[EntityId, EntityId]] = {}
        self._dataprops: dict[EntityId, tuple[EntityId, Datatype]] = {}
        self._ancestors: dict[EntityId, set[EntityId]] = {}  # reflexive
        self._types: dict[EntityId, set[EntityId]] = {}  # individual -> asserted classes
        self._values: dict[tuple[EntityId, EntityId], set[Value]] = {}
        self._subjects: dict[tuple[EntityId, EntityId], set[EntityId]] = {}
        for ax in sorted(axioms, key=Axiom.sort_key):
            self.add_axiom(ax)

    # -- mutation ---------------------------------------------------------

    def add_axiom(self, ax: Axiom) -> KnowledgeBase:
        """Insert ``ax`` and return ``self``.  Re-adding a present axiom is a no-op."""
        if ax in self._axioms:
            return self
        handler = {
            AxiomKind.CLASS_DECL: self._add_class,
            AxiomKind.OBJ_PROP_DECL: self._add_objprop,
            AxiomKind.DATA_PROP_DECL: self._add_dataprop,
            AxiomKind.SUBCLASS_OF: self._add_subclass,
            AxiomKind.CLASS_ASSERTION: self._add_instance,
            AxiomKind.OBJ_PROP_ASSERTION: self._add_rel,
            AxiomKind.DATA_PROP_ASSERTION: self._add_val,
        }[ax.kind]
        handler(*ax.args)
        self._axioms.add(ax)
        return self

    def _check_fresh(self, e: EntityId, as_what: str) -> None:
        taken = {
            "class": e in self._classes,
            "property": e in self._objprops or e in self._dataprops,
            "individual": e in self._types,
        }
        others = [k for k, v in taken.items() if v and k != as_what]
        if others:
            raise DeclarationConflict(f"{e} already declared as {others[0]}")

    def _add_class(self, c: EntityId) -> None:
        self._check_fresh(c, "class")
        self._classes.add(c)
        self._ancestors.setdefault(c, {c})

    def _add_objprop(self, p: EntityId, domain: EntityId, range_: EntityId) -> None:
        self._check_fresh(p, "property")
        self._require_class(domain)
        self._require_class(range_)
        if p in self._dataprops or self._objprops.get(p, (domain, range_)) != (domain, range_):
            raise DeclarationConflict(f"property {p} redeclared with a different signature")
        self._objprops[p] = (domain, range_)

    def _add_dataprop(self, p: EntityId, domain: EntityId, datatype: Datatype) -> None:
        self._check_fresh(p, "property")
        self._require_class(domain)
        if p in self._objprops or self._dataprops.get(p, (domain, datatype)) != (domain, datatype):
            raise DeclarationConflict(f"property {p} redeclared with a different signature")
        self._dataprops[p] = (domain, datatype)

    def _add_subclass(self, sub: EntityId, sup: EntityId) -> None:
        self._require_class(sub)
        self._require_class(sup)
        if sub == sup:
            return
        if sub in self._ancestors[sup]:
            raise SubclassCycle(sub, sup)
        gained = self._ancestors[sup]
        for anc in self._ancestors.values():
            if sub in anc:
                anc |= gained

    def _add_instance(self, ind: EntityId, c: EntityId) -> None:
        self._require_class(c)
        self._check_fresh(ind, "individual")
        self._types.setdefault(ind, set()).add(c)

    def _add_rel(self, s: EntityId, p: EntityId, o: EntityId) -> None:
        self._require_individual(s)
        if p not in self._objprops:
            raise UndeclaredEntity(p, "object property")
        self._require_individual(o)
        domain, range_ = self._objprops[p]
        if not self.is_instance_of(s, domain):
            raise DomainViolation(f"{s} is not a {domain} (domain of {p})")
        if not self.is_instance_of(o, range_):
            raise RangeViolation(f"{o} is not a {range_} (range of {p})")
        self._values.setdefault((s, p), set()).add(o)
        self._subjects.setdefault((p, o), set()).add(s)

    def _add_val(self, s: EntityId, p: EntityId, v: Literal) -> None:
        self._require_individual(s)
        if p not in self._dataprops:
            raise UndeclaredEntity(p, "data property")
        domain, datatype = self._dataprops[p]
        if not self.is_instance_of(s, domain):
            raise DomainViolation(f"{s} is not a {domain} (domain of {p})")
        if v.datatype is not datatype:
            raise RangeViolation(f"{p} expects {datatype.value}, got {v.datatype.value}")
        self._values.setdefault((s, p), set()).add(v)

    def replace_values(self, subject: EntityId, prop: EntityId, values: Iterable) -> None:
        """Overwrite the data values of ``(subject, prop)``.

        This is the only retraction the KB offers; it touches individual
        state (e.g. a device's ``isFunctioning`` flag), never the schema.
        """
        if prop not in self._dataprops:
            raise UndeclaredEntity(prop, "data property")
        self._require_individual(subject)
        new = [val(subject, prop, v) for v in values]
        for ax in new:  # validate before mutating
            domain, datatype = self._dataprops[prop]
            if not self.is_instance_of(subject, domain):
                raise DomainViolation(f"{subject} is not a {domain} (domain of {prop})")
            if ax.args[2].datatype is not datatype:
                raise RangeViolation(f"{prop} expects {datatype.value}")
        for old in self._values.pop((subject, prop), set()):
            self._axioms.discard(val(subject, prop, old))
        for ax in new:
            self.add_axiom(ax)

    def copy(self) -> KnowledgeBase:
        return KnowledgeBase(self._axioms)

    # -- queries ----------------------------------------------------------

    def _require_class(self, c: EntityId) -> None:
        if c not in self._classes:
            raise UndeclaredEntity(c, "class")

    def _require_individual(self, i: EntityId) -> None:
        if i not in self._types:
            raise UndeclaredEntity(i, "individual")

    def _require_declared(self, e: EntityId) -> None:
        if not (e in self._types or e in self._classes
                or e in self._objprops or e in self._dataprops):
            raise UndeclaredEntity(e)

    def is_class(self, e: EntityId) -> bool:
        return e in self._classes

    def is_individual(self, e: EntityId) -> bool:
        return e in self._types

    def is_property(self, e: EntityId) -> bool:
        return e in self._objprops or e in self._dataprops

    def is_subclass_of(self, sub: EntityId, sup: EntityId) -> bool:
        self._require_class(sub)
        self._require_class(sup)
        return sup in self._ancestors[sub]

    def superclasses(self, c: EntityId) -> list[EntityId]:
        """Reflexive-transitive superclasses of ``c``, sorted."""
        self._require_class(c)
        return sorted(self._ancestors[c])

    def is_instance_of(self, ind: EntityId, c: EntityId) -> bool:
        """Inferred membership; false for unknown individuals."""
        return any(c in self._ancestors[t] for t in self._types.get(ind, ()))

    def types_of(self, ind: EntityId) -> list[EntityId]:
        """Asserted classes of an individual, sorted."""
        self._require_individual(ind)
        return sorted(self._types[ind])

    def instances_of(self, c: EntityId, direct: bool = False) -> list[EntityId]:
        self._require_class(c)
        if direct:
            hits = (i for i, ts in self._types.items() if c in ts)
        else:
            hits = (i for i, ts in self._types.items()
                    if any(c in self._ancestors[t] for t in ts))
        return sorted(hits)

    def property_values(self, subject: EntityId, prop: EntityId) -> list[Value]:
        self._require_declared(subject)
        if not self.is_property(prop):
            raise UndeclaredEntity(prop, "property")
        return sorted(self._values.get((subject, prop), ()), key=value_sort_key)

    def subjects_of(self, prop: EntityId, obj: EntityId) -> list[EntityId]:
        """Individuals ``s`` with ``rel s prop obj``, sorted."""
        if prop not in self._objprops:
            raise UndeclaredEntity(prop, "object property")
        return sorted(self._subjects.get((prop, obj), ()))

    def first_value(self, subject: EntityId, prop: EntityId, default=None):
        values = self.property_values(subject, prop)
        return values[0] if values else default

    def axiom_count(self) -> int:
        return len(self._axioms)

    def __len__(self) -> int:
        return len(self._axioms)

    def __iter__(self) -> Iterator[Axiom]:
        return iter(sorted(self._axioms, key=Axiom.sort_key))

    def __contains__(self, ax: object) -> bool:
        return ax in self._axioms

    @property
    def classes(self) -> list[EntityId]:
        return sorted(self._classes)

    @property
    def individuals(self) -> list[EntityId]:
        return sorted(self._types)


def add_axiom(kb: KnowledgeBase, ax: Axiom) -> KnowledgeBase:
    return kb.add_axiom(ax)
