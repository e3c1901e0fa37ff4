"""Name resolution, cycle detection and procedure dataflow checks."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Mapping

from ..errors import DuplicateName, RecursiveType, UndefinedVariable, UnresolvedName
from .ast import BASIC_NAMES, Choice, NamedRef, Node, OperationDecl, Pos, Procedure, Program, TypeDecl, TypeExpr, TypeRef


@dataclass(frozen=True)
class ResolvedProgram:
    program: Program
    types: Mapping[str, TypeDecl]
    operations: Mapping[str, OperationDecl]
    procedures: tuple[Procedure, ...]

    def type_ref(self, name: str) -> TypeRef:
        """The type denoted by ``name`` (a declared type or a basic kind)."""
        if name in BASIC_NAMES:
            return Node(BASIC_NAMES[name])
        try:
            return self.types[name].type
        except KeyError:
            raise UnresolvedName(name) from None

    def deref(self, t: TypeRef) -> TypeExpr:
        """Follow named references (and aliases) to a structural type."""
        while isinstance(t, NamedRef):
            t = self.type_ref(t.name)
        return t


def _at(pos: Pos | None) -> tuple[int | None, int | None]:
    return (pos.line, pos.col) if pos else (None, None)


def _refs(t: TypeRef) -> Iterator[NamedRef]:
    if isinstance(t, NamedRef):
        yield t
    elif isinstance(t, Choice):
        for a in t.alternatives:
            yield from _refs(a)
    else:
        for f in t.children:
            yield from _refs(f.type)


def _check_cycles(types: dict[str, TypeDecl]) -> None:
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: list[str] = []

    def visit(name: str) -> None:
        state[name] = 1
        stack.append(name)
        for ref in _refs(types[name].type):
            if ref.name not in types:
                continue
            if state.get(ref.name) == 1:
                cycle = stack[stack.index(ref.name):] + [ref.name]
                raise RecursiveType(cycle, *_at(types[name].pos))
            if ref.name not in state:
                visit(ref.name)
        stack.pop()
        state[name] = 2

    for name in types:
        if name not in state:
            visit(name)


def resolve(p: Program) -> ResolvedProgram:
    """Check that ``p`` is closed, acyclic and has well-formed dataflow.

    Procedures without an explicit parameter type take the request type of
    the operation bearing the procedure's name.
    """
    types = {d.name: d for d in p.types}
    ops = {o.name: o for o in p.operations}
    if len(types) != len(p.types) or len(ops) != len(p.operations):
        raise DuplicateName("duplicate declaration")

    def known(name: str) -> bool:
        return name in types or name in BASIC_NAMES

    for d in p.types:
        for ref in _refs(d.type):
            if ref.name not in types:
                raise UnresolvedName(ref.name, *_at(ref.pos))
    _check_cycles(types)

    for o in p.operations:
        for name in (o.request, o.response):
            if not known(name):
                raise UnresolvedName(name, *_at(o.pos))

    procs = []
    seen: set[str] = set()
    for proc in p.procedures:
        if proc.name in seen:
            raise DuplicateName(f"procedure {proc.name!r}", *_at(proc.pos))
        seen.add(proc.name)
        param_type = proc.param_type
        if param_type is None:
            if proc.name not in ops:
                raise UnresolvedName(
                    f"{proc.name} (no operation of that name gives the parameter type; write '{proc.param}: <type>')",
                    *_at(proc.pos),
                )
            param_type = ops[proc.name].request
        elif not known(param_type):
            raise UnresolvedName(param_type, *_at(proc.pos))
        defined = {proc.param}
        for call in proc.body:
            if call.operation not in ops:
                raise UnresolvedName(call.operation, *_at(call.pos))
            if call.argument.base not in defined:
                raise UndefinedVariable(call.argument.base, *_at(call.argument.pos))
            if call.output in defined:
                raise DuplicateName(f"variable {call.output!r} is already bound", *_at(call.pos))
            defined.add(call.output)
        procs.append(replace(proc, param_type=param_type))

    return ResolvedProgram(p, types, ops, tuple(procs))
