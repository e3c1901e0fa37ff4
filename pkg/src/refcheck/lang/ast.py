"""Syntax tree for type declarations, operation signatures and procedures.

Every node carries an optional source position that is excluded from
equality, so two programs compare equal when they are structurally equal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from ..predicate import PredAst
from ..regex import RegexAst


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _pos() -> Optional[Pos]:
    return field(default=None, compare=False, repr=False)


class BasicKind(enum.Enum):
    VOID = "void"
    BOOL = "bool"
    INT = "int"
    DOUBLE = "double"
    STRING = "string"

    def __str__(self) -> str:
        return self.value


BASIC_NAMES = {k.value: k for k in BasicKind}


@dataclass(frozen=True)
class Cardinality:
    min: int = 1
    max: Optional[int] = 1  # None = unbounded

    def __post_init__(self):
        if self.min < 0 or (self.max is not None and self.max < self.min):
            raise ValueError(f"bad cardinality [{self.min},{self.max}]")

    @property
    def is_single(self) -> bool:
        return self.min == 1 and self.max == 1

    def admits(self, count: int) -> bool:
        return self.min <= count and (self.max is None or count <= self.max)

    def __str__(self) -> str:
        return f"[{self.min},{'*' if self.max is None else self.max}]"


ONE = Cardinality(1, 1)
MANY = Cardinality(0, None)
OPTIONAL = Cardinality(0, 1)


@dataclass(frozen=True)
class RegexRefinement:
    regex: RegexAst


@dataclass(frozen=True)
class PredicateRefinement:
    binder: str
    pred: PredAst


Refinement = Union[RegexRefinement, PredicateRefinement, None]


@dataclass(frozen=True)
class NamedRef:
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Field:
    name: str
    card: Cardinality
    type: "TypeRef"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Node:
    basic: BasicKind
    refinement: Refinement = None
    children: tuple[Field, ...] = ()
    pos: Optional[Pos] = _pos()

    def field(self, name: str) -> Optional[Field]:
        for f in self.children:
            if f.name == name:
                return f
        return None

    def erase_refinements(self) -> "Node":
        return Node(
            self.basic,
            None,
            tuple(Field(f.name, f.card, erase_refinements(f.type), f.pos) for f in self.children),
            self.pos,
        )


@dataclass(frozen=True)
class Choice:
    alternatives: tuple["TypeRef", ...]
    pos: Optional[Pos] = _pos()


TypeExpr = Union[Node, Choice]
TypeRef = Union[Node, Choice, NamedRef]


def erase_refinements(t: TypeRef) -> TypeRef:
    """Drop every refinement reachable inline from ``t`` (named references are left alone)."""
    if isinstance(t, Node):
        return t.erase_refinements()
    if isinstance(t, Choice):
        return Choice(tuple(erase_refinements(a) for a in t.alternatives), t.pos)
    return t


@dataclass(frozen=True)
class TypeDecl:
    name: str
    type: TypeRef
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class OperationDecl:
    name: str
    request: str
    response: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Path:
    base: str
    fields: tuple[str, ...] = ()
    pos: Optional[Pos] = _pos()

    def __str__(self) -> str:
        return ".".join((self.base,) + self.fields)


@dataclass(frozen=True)
class CallStmt:
    operation: str
    argument: Path
    output: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Procedure:
    name: str
    param: str
    param_type: Optional[str]  # None: taken from the operation of the same name
    body: tuple[CallStmt, ...] = ()
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Program:
    types: tuple[TypeDecl, ...] = ()
    operations: tuple[OperationDecl, ...] = ()
    procedures: tuple[Procedure, ...] = ()

    def type_decl(self, name: str) -> Optional[TypeDecl]:
        for d in self.types:
            if d.name == name:
                return d
        return None

    def operation(self, name: str) -> Optional[OperationDecl]:
        for o in self.operations:
            if o.name == name:
                return o
        return None
