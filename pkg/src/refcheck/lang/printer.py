"""Canonical source rendering; output re-parses to a structurally equal program."""

from __future__ import annotations

from ..predicate import predicate_to_str
from ..regex import to_pattern
from .ast import (
    MANY,
    OPTIONAL,
    CallStmt,
    Choice,
    Field,
    NamedRef,
    PredicateRefinement,
    Procedure,
    Program,
    RegexRefinement,
    TypeRef,
)

INDENT = "  "


def quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    return '"' + out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r") + '"'


def _card(f: Field) -> str:
    if f.card == MANY:
        return "*"
    if f.card == OPTIONAL:
        return "?"
    if not f.card.is_single:
        raise ValueError(f"cardinality {f.card} has no surface syntax")
    return ""


def type_to_str(t: TypeRef, depth: int = 0) -> str:
    if isinstance(t, NamedRef):
        return t.name
    if isinstance(t, Choice):
        return " | ".join(type_to_str(a, depth) for a in t.alternatives)
    s = t.basic.value
    if isinstance(t.refinement, RegexRefinement):
        s += f"({quote(to_pattern(t.refinement.regex))})"
    elif isinstance(t.refinement, PredicateRefinement):
        s += f"({predicate_to_str(t.refinement.pred)})"
    if t.children:
        pad = INDENT * (depth + 1)
        lines = [f"{pad}.{f.name}{_card(f)}: {type_to_str(f.type, depth + 1)}" for f in t.children]
        s += " {\n" + "\n".join(lines) + "\n" + INDENT * depth + "}"
    return s


def _call(c: CallStmt) -> str:
    return f"{c.operation}({c.argument})({c.output})"


def _procedure(p: Procedure) -> str:
    param = p.param if p.param_type is None else f"{p.param}: {p.param_type}"
    head = f"{INDENT}{p.name}({param}) {{"
    if not p.body:
        return head + "}"
    body = "\n".join(f"{INDENT * 2}{_call(c)};" for c in p.body)
    return f"{head}\n{body}\n{INDENT}}}"


def pretty_print(p: Program) -> str:
    """Render ``p`` as ``.rj`` source; an empty program renders as ``""``."""
    blocks: list[str] = []
    for d in p.types:
        blocks.append(f"type {d.name}: {type_to_str(d.type)}")
    for o in p.operations:
        blocks.append(f"operation {o.name}({o.request})({o.response})")
    if p.procedures:
        blocks.append("main {\n" + "\n".join(_procedure(x) for x in p.procedures) + "\n}")
    return "".join(b + "\n" for b in blocks)
