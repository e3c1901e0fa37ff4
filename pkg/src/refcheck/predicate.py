"""Linear arithmetic refinement predicates over a single bound variable."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import NonlinearTerm, PredicateSyntaxError, UnknownVariable

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[Var, Lit, Neg, BinOp]


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # '<', '<=', '>', '>=', '==', '!='
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Not:
    operand: "PredAst"


@dataclass(frozen=True)
class And:
    lhs: "PredAst"
    rhs: "PredAst"


@dataclass(frozen=True)
class Or:
    lhs: "PredAst"
    rhs: "PredAst"


PredAst = Union[BoolConst, Cmp, Not, And, Or]

CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>&&|\|\||<=|>=|==|!=|[<>!+\-*()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise PredicateSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def infer_binder(text: str, default: str = "value") -> str:
    """Return the first identifier mentioned in ``text`` (the refined value's name)."""
    for kind, value, _ in _tokenize(text):
        if kind == "ident" and value not in ("true", "false"):
            return value
    return default


def _has_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Lit):
        return False
    if isinstance(e, Neg):
        return _has_var(e.operand)
    return _has_var(e.lhs) or _has_var(e.rhs)


_PRED_TYPES = (BoolConst, Cmp, Not, And, Or)


class _PredParser:
    # One precedence grammar for both sorts; operand sorts are checked as
    # nodes are built, so parenthesised groups need no backtracking.

    def __init__(self, text: str, binder: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.binder = binder

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def accept(self, value: str) -> bool:
        kind, v, _ = self.peek()
        if kind == "op" and v == value:
            self.i += 1
            return True
        return False

    def fail(self, expected: str, at: int | None = None):
        kind, v, pos = self.peek()
        found = "end of predicate" if kind == "eof" else repr(v)
        raise PredicateSyntaxError(f"expected {expected}, found {found} at offset {pos if at is None else at}")

    def pred(self, node, at: int):
        if not isinstance(node, _PRED_TYPES):
            raise PredicateSyntaxError(f"expected a boolean condition at offset {at}")
        return node

    def expr(self, node, at: int):
        if isinstance(node, _PRED_TYPES):
            raise PredicateSyntaxError(f"expected an arithmetic expression at offset {at}")
        return node

    def parse(self) -> PredAst:
        at = self.peek()[2]
        p = self.pred(self.parse_or(), at)
        if self.peek()[0] != "eof":
            self.fail("end of predicate")
        return p

    def parse_or(self):
        at = self.peek()[2]
        p = self.parse_and()
        while self.accept("||"):
            rat = self.peek()[2]
            p = Or(self.pred(p, at), self.pred(self.parse_and(), rat))
        return p

    def parse_and(self):
        at = self.peek()[2]
        p = self.parse_not()
        while self.accept("&&"):
            rat = self.peek()[2]
            p = And(self.pred(p, at), self.pred(self.parse_not(), rat))
        return p

    def parse_not(self):
        if self.accept("!"):
            at = self.peek()[2]
            return Not(self.pred(self.parse_not(), at))
        return self.parse_cmp()

    def parse_cmp(self):
        at = self.peek()[2]
        lhs = self.parse_additive()
        kind, v, op_at = self.peek()
        if kind != "op" or v not in CMP_OPS:
            return lhs
        self.i += 1
        rat = self.peek()[2]
        rhs = self.parse_additive()
        nk, nv, _ = self.peek()
        if nk == "op" and nv in CMP_OPS:
            self.fail("'&&', '||' or ')' (comparisons do not chain)")
        return Cmp(v, self.expr(lhs, at), self.expr(rhs, rat))

    def parse_additive(self):
        at = self.peek()[2]
        e = self.parse_mul()
        while True:
            kind, v, _ = self.peek()
            if kind == "op" and v in ("+", "-"):
                self.i += 1
                rat = self.peek()[2]
                e = BinOp(v, self.expr(e, at), self.expr(self.parse_mul(), rat))
            else:
                return e

    def parse_mul(self):
        at = self.peek()[2]
        e = self.parse_unary()
        while self.accept("*"):
            rat = self.peek()[2]
            rhs = self.expr(self.parse_unary(), rat)
            self.expr(e, at)
            if _has_var(e) and _has_var(rhs):
                raise NonlinearTerm(f"product of two terms mentioning {self.binder!r} at offset {rat}")
            e = BinOp("*", e, rhs)
        return e

    def parse_unary(self):
        e = self._unary()
        if isinstance(e, Lit) and not INT64_MIN <= e.value <= INT64_MAX:
            raise PredicateSyntaxError(f"integer literal {e.value} outside 64-bit range")
        return e

    def _unary(self):
        if self.accept("-"):
            at = self.peek()[2]
            inner = self.expr(self._unary(), at)
            return Lit(-inner.value) if isinstance(inner, Lit) else Neg(inner)
        kind, v, at = self.peek()
        if kind == "num":
            self.i += 1
            return Lit(int(v))
        if kind == "ident":
            self.i += 1
            if v in ("true", "false"):
                return BoolConst(v == "true")
            if v != self.binder:
                raise UnknownVariable(f"{v!r} (only {self.binder!r} is in scope) at offset {at}")
            return Var(v)
        if self.accept("("):
            inner = self.parse_or()
            if not self.accept(")"):
                self.fail("')'")
            return inner
        self.fail("expression")


def parse_predicate(text: str, binder: str) -> PredAst:
    """Parse ``text`` as a predicate whose only free variable is ``binder``.

    >>> parse_predicate("age>18", "age")
    Cmp(op='>', lhs=Var(name='age'), rhs=Lit(value=18))
    """
    try:
        return _PredParser(text, binder).parse()
    except RecursionError:
        raise PredicateSyntaxError("predicate nested too deeply") from None


def _eval_expr(e: Expr, v):
    if isinstance(e, Var):
        return v
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Neg):
        return -_eval_expr(e.operand, v)
    a = _eval_expr(e.lhs, v)
    b = _eval_expr(e.rhs, v)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


def eval_predicate(p: PredAst, v: int | float) -> bool:
    """Evaluate ``p`` with the binder bound to ``v``."""
    if isinstance(p, BoolConst):
        return p.value
    if isinstance(p, Not):
        return not eval_predicate(p.operand, v)
    if isinstance(p, And):
        return eval_predicate(p.lhs, v) and eval_predicate(p.rhs, v)
    if isinstance(p, Or):
        return eval_predicate(p.lhs, v) or eval_predicate(p.rhs, v)
    a = _eval_expr(p.lhs, v)
    b = _eval_expr(p.rhs, v)
    return {
        "<": a < b,
        "<=": a <= b,
        ">": a > b,
        ">=": a >= b,
        "==": a == b,
        "!=": a != b,
    }[p.op]


# ---------------------------------------------------------------------------
# SMT translation

_SMT_CMP = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "="}


def _smt_num(n: int, real: bool) -> str:
    body = f"{abs(n)}.0" if real else str(abs(n))
    return f"(- {body})" if n < 0 else body


def _smt_expr(e: Expr, subject: str, real: bool) -> str:
    if isinstance(e, Var):
        return subject
    if isinstance(e, Lit):
        return _smt_num(e.value, real)
    if isinstance(e, Neg):
        return f"(- {_smt_expr(e.operand, subject, real)})"
    return f"({e.op} {_smt_expr(e.lhs, subject, real)} {_smt_expr(e.rhs, subject, real)})"


def _flatten(p: PredAst, cls) -> list[PredAst]:
    if isinstance(p, cls):
        return _flatten(p.lhs, cls) + _flatten(p.rhs, cls)
    return [p]


def to_smt(p: PredAst | None, subject: str, sort: str = "Int") -> str:
    """Translate ``p`` to an SMT-LIB boolean term with the binder replaced by ``subject``.

    ``sort`` is ``"Int"`` or ``"Real"``; ``None`` (no refinement) yields ``true``.
    """
    real = sort == "Real"
    if p is None:
        return "true"
    if isinstance(p, BoolConst):
        return "true" if p.value else "false"
    if isinstance(p, Not):
        return f"(not {to_smt(p.operand, subject, sort)})"
    if isinstance(p, (And, Or)):
        name = "and" if isinstance(p, And) else "or"
        parts = [to_smt(x, subject, sort) for x in _flatten(p, type(p))]
        return f"({name} {' '.join(parts)})"
    lhs = _smt_expr(p.lhs, subject, real)
    rhs = _smt_expr(p.rhs, subject, real)
    if p.op == "!=":
        return f"(not (= {lhs} {rhs}))"
    return f"({_SMT_CMP[p.op]} {lhs} {rhs})"


# ---------------------------------------------------------------------------
# printing


def _expr_str(e: Expr, prec: int = 0) -> str:
    # prec: 0 additive, 1 multiplicative, 2 unary operand
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        s = str(e.value)
        return f"({s})" if e.value < 0 and prec >= 2 else s
    if isinstance(e, Neg):
        s = "-" + _expr_str(e.operand, 2)
        return f"({s})" if prec >= 2 else s
    if e.op in "+-":
        s = f"{_expr_str(e.lhs, 0)} {e.op} {_expr_str(e.rhs, 1)}"
        return f"({s})" if prec >= 1 else s
    s = f"{_expr_str(e.lhs, 1)} * {_expr_str(e.rhs, 2)}"
    return f"({s})" if prec >= 2 else s


def predicate_to_str(p: PredAst, prec: int = 0) -> str:
    """Render ``p`` in the surface syntax accepted by :func:`parse_predicate`."""
    # prec: 0 or-operand, 1 and-lhs, 2 and-rhs, 3 not-operand
    if isinstance(p, BoolConst):
        return "true" if p.value else "false"
    if isinstance(p, Cmp):
        s = f"{_expr_str(p.lhs)} {p.op} {_expr_str(p.rhs)}"
        return f"({s})" if prec >= 3 else s
    if isinstance(p, Not):
        return "!" + predicate_to_str(p.operand, 3)
    if isinstance(p, And):
        s = f"{predicate_to_str(p.lhs, 1)} && {predicate_to_str(p.rhs, 2)}"
        return f"({s})" if prec >= 2 else s
    s = f"{predicate_to_str(p.lhs, 0)} || {predicate_to_str(p.rhs, 1)}"
    return f"({s})" if prec >= 1 else s
