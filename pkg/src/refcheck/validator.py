"""Runtime validation of value trees against resolved refined types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .errors import UnknownTypeName
from .lang.ast import BASIC_NAMES, BasicKind, Choice, NamedRef, Node, PredicateRefinement, RegexRefinement, TypeRef
from .lang.resolve import ResolvedProgram
from .predicate import eval_predicate, predicate_to_str
from .regex import matches, to_pattern
from .values import ValueTree

MAX_ERRORS = 256

MISSING_FIELD = "MissingField"
CARDINALITY_VIOLATION = "CardinalityViolation"
BASIC_KIND_MISMATCH = "BasicKindMismatch"
REGEX_VIOLATION = "RegexViolation"
PREDICATE_VIOLATION = "PredicateViolation"
NO_CHOICE_BRANCH = "NoChoiceBranch"
UNEXPECTED_FIELD = "UnexpectedField"

PathT = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class ValidationError:
    path: PathT
    kind: str
    message: str
    branches: tuple[tuple["ValidationError", ...], ...] = ()

    @property
    def pointer(self) -> str:
        """JSON-pointer-like path, e.g. ``/post/2/pid/0``; the root is ``""``."""
        return "".join(f"/{name}/{i}" for name, i in self.path)

    @property
    def dotted(self) -> str:
        """Jolie-style path, e.g. ``.post[2].pid``; index 0 is implicit."""
        return "".join(f".{name}" + (f"[{i}]" if i else "") for name, i in self.path) or "."

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"path": self.pointer, "kind": self.kind, "message": self.message}
        if self.branches:
            out["branches"] = [[e.to_json() for e in b] for b in self.branches]
        return out

    def __str__(self) -> str:
        return f"{self.dotted}: {self.kind}: {self.message}"


class _Validator:
    def __init__(self, program: ResolvedProgram, open_world: bool, limit: int):
        self.program = program
        self.open_world = open_world
        self.limit = limit

    def check(self, v: ValueTree, t: TypeRef, path: PathT, out: list[ValidationError]) -> None:
        if len(out) >= self.limit:
            return
        t = self.program.deref(t)
        if isinstance(t, Choice):
            branches = []
            for alt in t.alternatives:
                errs: list[ValidationError] = []
                self.check(v, alt, path, errs)
                if not errs:
                    return
                branches.append(tuple(errs))
            n = len(t.alternatives)
            out.append(ValidationError(path, NO_CHOICE_BRANCH, f"value matches none of the {n} alternatives", tuple(branches)))
            return
        self.check_node(v, t, path, out)

    def check_node(self, v: ValueTree, t: Node, path: PathT, out: list[ValidationError]) -> None:
        kind = v.kind
        if kind is t.basic or (t.basic is BasicKind.DOUBLE and kind is BasicKind.INT):
            self.check_refinement(v, t, path, out)
        else:
            out.append(ValidationError(path, BASIC_KIND_MISMATCH, f"expected {t.basic}, found {kind}"))

        declared = set()
        for f in t.children:
            declared.add(f.name)
            items = v.children.get(f.name, ())
            if not items and f.card.min > 0:
                out.append(ValidationError(path + ((f.name, 0),), MISSING_FIELD, f"required field .{f.name} {f.card} is missing"))
            elif not f.card.admits(len(items)):
                out.append(ValidationError(
                    path + ((f.name, 0),), CARDINALITY_VIOLATION,
                    f"field .{f.name} occurs {len(items)} times, allowed {f.card}",
                ))
            for i, item in enumerate(items):
                self.check(item, f.type, path + ((f.name, i),), out)
        if not self.open_world:
            for name in v.children:
                if name not in declared:
                    out.append(ValidationError(path + ((name, 0),), UNEXPECTED_FIELD, f"field .{name} is not declared"))

    def check_refinement(self, v: ValueTree, t: Node, path: PathT, out: list[ValidationError]) -> None:
        r = t.refinement
        if isinstance(r, RegexRefinement):
            if not matches(r.regex, v.root):
                out.append(ValidationError(path, REGEX_VIOLATION, f"{v.root!r} does not match {to_pattern(r.regex)}"))
        elif isinstance(r, PredicateRefinement):
            x = float(v.root) if t.basic is BasicKind.DOUBLE else v.root
            if not eval_predicate(r.pred, x):
                out.append(ValidationError(
                    path, PREDICATE_VIOLATION,
                    f"{v.root!r} violates {predicate_to_str(r.pred)} ({r.binder} = {v.root!r})",
                ))


def validate(
    value: ValueTree,
    type_: TypeRef,
    program: ResolvedProgram,
    open_world: bool = False,
    limit: int = MAX_ERRORS,
) -> list[ValidationError]:
    """Every way ``value`` fails to inhabit ``type_``; empty when it conforms.

    Undeclared fields are errors unless ``open_world``. At most ``limit``
    errors are collected.
    """
    out: list[ValidationError] = []
    _Validator(program, open_world, limit).check(value, type_, (), out)
    return out[:limit]


def validate_named(value: ValueTree, type_name: str, program: ResolvedProgram, **kw) -> list[ValidationError]:
    """Validate against a declared (or basic) type given by name."""
    if type_name in program.types:
        return validate(value, NamedRef(type_name), program, **kw)
    if type_name in BASIC_NAMES:
        return validate(value, program.type_ref(type_name), program, **kw)
    raise UnknownTypeName(type_name)
