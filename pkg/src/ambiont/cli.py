"""Command-line entry point.

Exit codes: 0 success, 1 load/parse/usage error, 2 failed scenario
expectations or an unsatisfiable plan under ``--require-satisfiable``.
The world argument ``@builtin`` stands for the shipped domain schema.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys
from collections import Counter
from dataclasses import fields
from typing import Optional, Sequence

from . import __version__
from .composition import NoCover, decompose, recompose, spec_from_json
from .context import (
    ContextRecord,
    DeviceKind,
    find_devices,
    format_pattern,
    parse_pattern,
    pattern_of,
)
from .goals import evaluate, goal_from_kb, goals_from_kb
from .kb import AxiomKind, EntityId, KBError, KnowledgeBase, Literal
from .schema import agent_view, base_schema, hardware_view, person_view, relations_of
from .simulator import LoadError, ScenarioError, run_file
from .text import Document, ParseError, load_file, serialize, stats
from .vocab import SC

BUILTIN = "@builtin"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _entity(text: str) -> EntityId:
    try:
        return EntityId.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_doc(path: str) -> Document:
    if path == BUILTIN:
        return base_schema()
    return load_file(path)


def _load_kb(args) -> KnowledgeBase:
    doc = _load_doc(args.file)
    removed = set(getattr(args, "remove", None) or ())
    if removed:
        doc = Document(doc.prefixes, [ax for ax in doc.statements
                                      if not removed & {a for a in ax.args if isinstance(a, EntityId)}])
    kb = doc.to_kb()
    for hw in getattr(args, "fail", None) or ():
        if not kb.is_instance_of(hw, SC.Hardware):
            raise KBError(f"--fail {hw}: not a hardware individual")
        kb.replace_values(hw, SC.isFunctioning, [False])
    return kb


def _fmt(value) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Literal):
        return value.render()
    if isinstance(value, dict):
        return "{" + ",".join(f"{k}={_fmt(v)}" for k, v in sorted(value.items())) + "}"
    if isinstance(value, (set, frozenset, tuple, list)):
        return "{" + ",".join(sorted(_fmt(v) for v in value)) + "}"
    return str(value)


def _print_record(rec) -> None:
    for f in fields(rec):
        value = getattr(rec, f.name)
        if isinstance(value, ContextRecord):
            value = format_pattern(pattern_of(value))
        print(f"{f.name}={_fmt(value)}")


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    doc = _load_doc(args.file)
    doc.to_kb()
    s = stats(doc)
    print(f"axioms={s.axiom_count} bytes={s.byte_size}")
    return 0


def cmd_stats(args) -> int:
    doc = _load_doc(args.file)
    if args.canonical:
        sys.stdout.buffer.write(serialize(doc))
        sys.stdout.flush()
        return 0
    kb = doc.to_kb()
    s = stats(doc)
    print(f"axioms={s.axiom_count} bytes={s.byte_size}")
    counts = Counter(ax.kind for ax in set(doc.statements))
    for kind in AxiomKind:
        print(f"{kind.value}={counts.get(kind, 0)}")
    print(f"prefixes={len(doc.prefixes)}")
    print(f"individuals={len(kb.individuals)}")
    return 0


def cmd_query(args) -> int:
    kb = _load_kb(args)
    if args.subclass:
        sub, sup = args.subclass
        for c in (sub, sup):
            if not kb.is_class(c):
                raise KBError(f"{c} is not a declared class")
        print("true" if kb.is_subclass_of(sub, sup) else "false")
    elif args.instances:
        if not kb.is_class(args.instances):
            raise KBError(f"{args.instances} is not a declared class")
        for i in kb.instances_of(args.instances, direct=args.direct):
            print(i)
    elif args.prop:
        subject, prop = args.prop
        if not kb.is_property(prop):
            raise KBError(f"{prop} is not a declared property")
        for v in kb.property_values(subject, prop):
            print(_fmt(v))
    elif args.hardware:
        _print_record(hardware_view(kb, args.hardware))
    elif args.person:
        _print_record(person_view(kb, args.person))
    elif args.agent:
        _print_record(agent_view(kb, args.agent))
    elif args.relations:
        for r in relations_of(kb, args.relations):
            print(f"{r.id} {r.source} -> {r.target} quality={r.quality} "
                  f"functions={_fmt({f.value for f in r.functions})}")
    return 0


def cmd_match(args) -> int:
    kb = _load_kb(args)
    pattern = parse_pattern(args.pattern)
    for hw in find_devices(kb, pattern, args.capability, args.kind):
        print(hw)
    return 0


def cmd_compose(args) -> int:
    kb = _load_kb(args)
    if args.decompose:
        for part in decompose(kb, args.decompose):
            print(part)
        return 0
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = spec_from_json(json.load(fh))
    except OSError as exc:
        raise LoadError(f"cannot read spec: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise LoadError(f"bad composite spec {args.spec}: {exc}") from None
    try:
        vc = recompose(kb, spec)
    except NoCover as exc:
        print(f"NoCover {spec.name}")
        for cap, kind in sorted(exc.missing):
            print(f"missing {cap} {kind.value}")
        return 0
    print(f"composite {spec.name}")
    for (cap, kind), dev in sorted(vc.assignment.items()):
        print(f"assign {cap} {kind.value} -> {dev}")
    print("devices " + " ".join(str(d) for d in vc.devices))
    return 0


def cmd_plan(args) -> int:
    kb = _load_kb(args)
    if args.goal:
        roots = [goal_from_kb(kb, args.goal)]
    else:
        if not kb.is_instance_of(args.agent, SC.Agent):
            raise KBError(f"{args.agent} is not an Agent")
        roots = goals_from_kb(kb, args.agent)
    ok = True
    for root in roots:
        report = evaluate(kb, root)
        ok &= report.satisfiable
        print(f"goal {root.id}")
        for line in report.lines():
            print(line)
        record = {"t": 0, "emitter": str(args.agent or root.id), "kind": "PlanEvaluated",
                  "payload": {"goal": str(root.id), **report.to_json()}}
        print(json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
    return 2 if args.require_satisfiable and not ok else 0


def cmd_run(args) -> int:
    result = run_file(args.scenario, seed=args.seed)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.trace_text())
    for v in result.verdicts:
        print(v.line())
    print(f"events={len(result.trace)} activities={len(result.activities)} "
          f"verdicts={'pass' if result.ok else 'fail'}")
    return 0 if result.ok else 2


COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "query": cmd_query,
    "match": cmd_match,
    "compose": cmd_compose,
    "plan": cmd_plan,
    "run": cmd_run,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ambiont", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ambiont {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def world(sp, mutable=False):
        sp.add_argument("file", help=f".amb file, or {BUILTIN} for the shipped schema")
        if mutable:
            sp.add_argument("--fail", action="append", type=_entity, metavar="HW",
                            help="mark hardware non-functioning before answering")
            sp.add_argument("--remove", action="append", type=_entity, metavar="ID",
                            help="drop every statement mentioning ID")

    world(sub.add_parser("validate", help="parse and load; print axiom count and size"))
    sp = sub.add_parser("stats", help="size and per-kind statement counts")
    world(sp)
    sp.add_argument("--canonical", action="store_true", help="print the canonical serialization")

    sp = sub.add_parser("query", help="subsumption, instance, property and view queries")
    world(sp, mutable=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--subclass", nargs=2, type=_entity, metavar=("A", "B"))
    g.add_argument("--instances", type=_entity, metavar="C")
    g.add_argument("--prop", nargs=2, type=_entity, metavar=("S", "P"))
    g.add_argument("--hardware", type=_entity, metavar="HW")
    g.add_argument("--person", type=_entity, metavar="P")
    g.add_argument("--agent", type=_entity, metavar="A")
    g.add_argument("--relations", type=_entity, metavar="USER")
    sp.add_argument("--direct", action="store_true", help="with --instances: no subclasses")

    sp = sub.add_parser("match", help="devices offering a capability in a context")
    world(sp, mutable=True)
    sp.add_argument("--pattern", default="", help="e.g. 'user=sc:john&room=Bedroom'")
    sp.add_argument("--capability", type=_entity, required=True)
    sp.add_argument("--kind", choices=[k.value for k in DeviceKind], default="any")

    sp = sub.add_parser("compose", help="recompose a virtual composite, or decompose one")
    world(sp, mutable=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", help="composite spec JSON file")
    g.add_argument("--decompose", type=_entity, metavar="COMPOSITE")

    sp = sub.add_parser("plan", help="evaluate goal trees")
    world(sp, mutable=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--goal", type=_entity, metavar="ROOT")
    g.add_argument("--agent", type=_entity)
    sp.add_argument("--require-satisfiable", action="store_true")

    sp = sub.add_parser("run", help="run a scenario file")
    sp.add_argument("scenario")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace", help="write the JSONL trace here")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "plan" and args.goal:
            args.agent = None
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"parse error:\n{exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LoadError, ScenarioError, KBError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
