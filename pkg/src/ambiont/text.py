"""Line-oriented ``.amb`` text format for ontology documents.

Grammar, one statement per line (any run of blanks separates tokens on
input, single spaces on output)::

    prefix <name>: <namespace>
    class <id>
    objprop <id> domain <id> range <id>
    dataprop <id> domain <id> range string|integer|decimal|boolean
    subclass <id> <id>
    ind <id> : <id>
    rel <id> <id> <id>
    val <id> <id> <literal>

Lines whose first non-blank character is ``#`` are comments.  Parsing never
stops at the first bad line: every problem is collected with its position.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .kb import (
    Axiom,
    AxiomKind,
    Datatype,
    EntityId,
    KnowledgeBase,
    Literal,
)

HEADER = "# amb 1\n"

_TOKEN_RE = re.compile(r'"(?:[^"\\]|\\.)*"|\S+')
_STRING_RE = re.compile(r'^"(?:[^"\\]|\\["\\])*"$')
_PREFIX_NAME_RE = re.compile(r"^([!#-9;-~]+):$")
_KEYWORDS = {kind.value: kind for kind in AxiomKind}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ErrorKind(enum.Enum):
    SYNTAX = "SyntaxError"
    UNKNOWN_KEYWORD = "UnknownKeyword"
    UNDECLARED_PREFIX = "UndeclaredPrefix"
    DUPLICATE_STATEMENT = "DuplicateStatement"


@dataclass(frozen=True)
class ParseIssue:
    kind: ErrorKind
    span: SourceSpan
    message: str

    def __str__(self) -> str:
        return f"{self.span}: {self.kind.value}: {self.message}"


class ParseError(Exception):
    """Raised by :func:`parse` when at least one line is malformed."""

    def __init__(self, issues: list[ParseIssue]):
        self.issues = issues
        super().__init__("\n".join(str(i) for i in issues))


@dataclass
class Document:
    prefixes: dict[str, str] = field(default_factory=dict)
    statements: list[Axiom] = field(default_factory=list)

    def axiom_set(self) -> frozenset[Axiom]:
        return frozenset(self.statements)

    def to_kb(self) -> KnowledgeBase:
        """Load into a fresh KB (statements are applied in canonical order)."""
        return KnowledgeBase(self.statements)

    def merged(self, other: Document) -> Document:
        prefixes = dict(self.prefixes)
        for name, ns in other.prefixes.items():
            if prefixes.setdefault(name, ns) != ns:
                raise ValueError(f"prefix {name}: bound to two namespaces")
        seen = set(self.statements)
        extra = [s for s in other.statements if s not in seen]
        return Document(prefixes, [*self.statements, *extra])


class _LineError(Exception):
    def __init__(self, kind: ErrorKind, column: int, message: str):
        self.kind = kind
        self.column = column
        self.message = message


class _Token(NamedTuple):
    text: str
    column: int


def _unescape(quoted: str) -> str:
    return re.sub(r"\\(.)", r"\1", quoted[1:-1])


def parse_literal(text: str) -> Literal:
    """Parse one literal token (quoted string, integer, decimal or boolean)."""
    if text.startswith('"'):
        if not _STRING_RE.match(text):
            raise ValueError(f"bad string literal {text}")
        return Literal(Datatype.STRING, _unescape(text))
    if text in ("true", "false"):
        return Literal(Datatype.BOOLEAN, text)
    if re.match(r"^-?[0-9]+$", text):
        return Literal(Datatype.INTEGER, text)
    if re.match(r"^-?[0-9]+\.[0-9]+$", text):
        return Literal(Datatype.DECIMAL, text)
    raise ValueError(f"not a literal: {text}")


def _parse_id(tok: _Token, prefixes: dict[str, str]) -> EntityId:
    try:
        eid = EntityId.parse(tok.text)
    except ValueError:
        raise _LineError(ErrorKind.SYNTAX, tok.column, f"bad identifier {tok.text!r}")
    if eid.prefix not in prefixes:
        raise _LineError(ErrorKind.UNDECLARED_PREFIX, tok.column,
                         f"prefix {eid.prefix!r} is not declared")
    return eid


def _expect_word(tok: _Token, word: str) -> None:
    if tok.text != word:
        raise _LineError(ErrorKind.SYNTAX, tok.column, f"expected {word!r}, got {tok.text!r}")


def _arity(tokens: list[_Token], n: int, end_column: int) -> None:
    if len(tokens) != n:
        col = tokens[n].column if len(tokens) > n else end_column
        what = "too many" if len(tokens) > n else "missing"
        raise _LineError(ErrorKind.SYNTAX, col,
                         f"{what} arguments for {tokens[0].text!r} (expected {n - 1})")


def _parse_statement(tokens: list[_Token], prefixes: dict[str, str], end: int) -> Axiom:
    head = tokens[0]
    kind = _KEYWORDS.get(head.text)
    if kind is None:
        raise _LineError(ErrorKind.UNKNOWN_KEYWORD, head.column,
                         f"unknown or unsupported keyword {head.text!r}")
    ident = lambda i: _parse_id(tokens[i], prefixes)  # noqa: E731

    if kind is AxiomKind.CLASS_DECL:
        _arity(tokens, 2, end)
        return Axiom(kind, (ident(1),))
    if kind in (AxiomKind.OBJ_PROP_DECL, AxiomKind.DATA_PROP_DECL):
        _arity(tokens, 6, end)
        _expect_word(tokens[2], "domain")
        _expect_word(tokens[4], "range")
        if kind is AxiomKind.OBJ_PROP_DECL:
            return Axiom(kind, (ident(1), ident(3), ident(5)))
        try:
            dt = Datatype(tokens[5].text)
        except ValueError:
            raise _LineError(ErrorKind.SYNTAX, tokens[5].column,
                             f"unknown datatype {tokens[5].text!r}")
        return Axiom(kind, (ident(1), ident(3), dt))
    if kind is AxiomKind.SUBCLASS_OF:
        _arity(tokens, 3, end)
        return Axiom(kind, (ident(1), ident(2)))
    if kind is AxiomKind.CLASS_ASSERTION:
        _arity(tokens, 4, end)
        _expect_word(tokens[2], ":")
        return Axiom(kind, (ident(1), ident(3)))
    if kind is AxiomKind.OBJ_PROP_ASSERTION:
        _arity(tokens, 4, end)
        return Axiom(kind, (ident(1), ident(2), ident(3)))
    _arity(tokens, 4, end)
    try:
        lit = parse_literal(tokens[3].text)
    except ValueError as exc:
        raise _LineError(ErrorKind.SYNTAX, tokens[3].column, str(exc))
    return Axiom(kind, (ident(1), ident(2), lit))


def _tokenize(line: str) -> list[_Token]:
    return [_Token(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(line)]


def parse_lenient(text: bytes | str) -> tuple[Document, list[ParseIssue]]:
    """Parse as much as possible; return the document and every issue found."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.split("\n")
    issues: list[ParseIssue] = []
    prefixes: dict[str, str] = {}
    pending: list[tuple[int, list[_Token], int]] = []

    # Prefix lines are collected first so statements may precede them.
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = _tokenize(line)
        if tokens[0].text != "prefix":
            pending.append((lineno, tokens, len(line) + 1))
            continue
        try:
            if len(tokens) != 3:
                col = tokens[3].column if len(tokens) > 3 else len(line) + 1
                raise _LineError(ErrorKind.SYNTAX, col, "prefix takes a name and a namespace")
            m = _PREFIX_NAME_RE.match(tokens[1].text)
            if not m:
                raise _LineError(ErrorKind.SYNTAX, tokens[1].column,
                                 f"bad prefix name {tokens[1].text!r}")
            name, ns = m.group(1), tokens[2].text
            if name in prefixes:
                kind = (ErrorKind.DUPLICATE_STATEMENT if prefixes[name] == ns
                        else ErrorKind.SYNTAX)
                raise _LineError(kind, tokens[0].column, f"prefix {name!r} declared twice")
            prefixes[name] = ns
        except _LineError as e:
            issues.append(ParseIssue(e.kind, SourceSpan(lineno, e.column), e.message))

    statements: list[Axiom] = []
    seen: set[Axiom] = set()
    for lineno, tokens, end in pending:
        try:
            ax = _parse_statement(tokens, prefixes, end)
            if ax in seen:
                raise _LineError(ErrorKind.DUPLICATE_STATEMENT, tokens[0].column,
                                 f"duplicate statement: {ax}")
        except _LineError as e:
            issues.append(ParseIssue(e.kind, SourceSpan(lineno, e.column), e.message))
            continue
        seen.add(ax)
        statements.append(ax)

    issues.sort(key=lambda i: (i.span.line, i.span.column))
    return Document(prefixes, statements), issues


def parse(text: bytes | str) -> Document:
    doc, issues = parse_lenient(text)
    if issues:
        raise ParseError(issues)
    return doc


def serialize(doc: Document) -> bytes:
    """Canonical UTF-8 bytes: header, sorted prefixes, then sorted statements."""
    out = [HEADER]
    out += [f"prefix {name}: {doc.prefixes[name]}\n" for name in sorted(doc.prefixes)]
    out += [f"{ax}\n" for ax in sorted(set(doc.statements), key=Axiom.sort_key)]
    return "".join(out).encode("utf-8")


class Stats(NamedTuple):
    axiom_count: int
    byte_size: int


def stats(doc: Document) -> Stats:
    return Stats(len(set(doc.statements)), len(serialize(doc)))


def document_from_axioms(axioms: Iterable[Axiom], prefixes: dict[str, str]) -> Document:
    return Document(dict(prefixes), list(axioms))


def load_file(path) -> Document:
    with open(path, "rb") as fh:
        return parse(fh.read())
