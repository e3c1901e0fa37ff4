"""Restricted regular expressions with anchored, linear-time matching.

The supported subset is deliberately small: literals, ``\\d``, character
classes with ranges, alternation, grouping and bounded/unbounded repetition.
The same AST feeds the runtime matcher (:func:`matches`) and the SMT-LIB
translation (:func:`to_smt`), so static and dynamic conformance agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .errors import RegexSyntaxError, UnsupportedConstruct

# Largest explicit repetition bound; loops are expanded in the NFA.
MAX_REPEAT = 1000
# SMT-LIB string theory only covers code points up to this value.
MAX_CODEPOINT = 0x2FFFF

_META = set("\\[](){}|*+?.^$")
_ESCAPABLE = _META | set("-/")
_CLASS_SPECIAL = set("\\[]^-")


@dataclass(frozen=True)
class Literal:
    char: str


@dataclass(frozen=True)
class AnyDigit:
    pass


@dataclass(frozen=True)
class Range:
    lo: str
    hi: str


@dataclass(frozen=True)
class CharClass:
    items: tuple[Union[Range, AnyDigit], ...]


@dataclass(frozen=True)
class Concat:
    items: tuple["RegexAst", ...] = ()


@dataclass(frozen=True)
class Alt:
    items: tuple["RegexAst", ...]


@dataclass(frozen=True)
class Loop:
    inner: "RegexAst"
    min: int
    max: int | None  # None = unbounded


RegexAst = Union[Literal, AnyDigit, CharClass, Concat, Alt, Loop]


def concat(items) -> RegexAst:
    """Build a normalized concatenation (nested concats flattened, singletons unwrapped)."""
    flat: list[RegexAst] = []
    for item in items:
        if isinstance(item, Concat):
            flat.extend(item.items)
        else:
            flat.append(item)
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


def alt(items) -> RegexAst:
    flat: list[RegexAst] = []
    for item in items:
        if isinstance(item, Alt):
            flat.extend(item.items)
        else:
            flat.append(item)
    if len(flat) == 1:
        return flat[0]
    return Alt(tuple(flat))


def star(r: RegexAst) -> Loop:
    return Loop(r, 0, None)


# ---------------------------------------------------------------------------
# parsing


class _RegexParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def next(self) -> str:
        if self.pos >= len(self.text):
            raise RegexSyntaxError("unexpected end of pattern", self.pos)
        c = self.text[self.pos]
        self.pos += 1
        return c

    def parse(self) -> RegexAst:
        r = self.parse_alt()
        if self.pos < len(self.text):
            raise RegexSyntaxError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return r

    def parse_alt(self) -> RegexAst:
        branches = [self.parse_concat()]
        while self.peek() == "|":
            self.pos += 1
            branches.append(self.parse_concat())
        return alt(branches)

    def parse_concat(self) -> RegexAst:
        items = []
        while self.peek() is not None and self.peek() not in "|)":
            items.append(self.parse_repeat())
        return concat(items)

    def parse_repeat(self) -> RegexAst:
        atom = self.parse_atom()
        c = self.peek()
        if c is None or c not in "*+?{":
            return atom
        if c == "*":
            self.pos += 1
            r = Loop(atom, 0, None)
        elif c == "+":
            self.pos += 1
            r = Loop(atom, 1, None)
        elif c == "?":
            self.pos += 1
            r = Loop(atom, 0, 1)
        else:
            lo, hi = self.parse_braces()
            r = Loop(atom, lo, hi)
        nxt = self.peek()
        if nxt is not None and nxt in "*+?{":
            if self.text.startswith("?", self.pos):
                raise UnsupportedConstruct("lazy quantifier", self.pos)
            raise RegexSyntaxError("multiple repeat", self.pos)
        return r

    def parse_braces(self) -> tuple[int, int | None]:
        at = self.pos
        self.pos += 1
        lo = self.parse_int()
        if lo is None:
            raise RegexSyntaxError("expected repetition count", self.pos)
        hi: int | None = lo
        if self.peek() == ",":
            self.pos += 1
            hi = self.parse_int()
        if self.peek() != "}":
            raise RegexSyntaxError("expected '}'", self.pos)
        self.pos += 1
        if hi is not None and lo > hi:
            raise RegexSyntaxError(f"repetition bounds out of order {{{lo},{hi}}}", at)
        if lo > MAX_REPEAT or (hi is not None and hi > MAX_REPEAT):
            raise UnsupportedConstruct(f"repetition bound above {MAX_REPEAT}", at)
        return lo, hi

    def parse_int(self) -> int | None:
        start = self.pos
        while self.peek() is not None and self.peek() in "0123456789":
            self.pos += 1
        if start == self.pos:
            return None
        return int(self.text[start:self.pos])

    def parse_atom(self) -> RegexAst:
        at = self.pos
        c = self.next()
        if c == "(":
            if self.peek() == "?":
                rest = self.text[self.pos:self.pos + 3]
                if rest[:2] in ("?=", "?!"):
                    raise UnsupportedConstruct("lookahead", at)
                if rest in ("?<=", "?<!"):
                    raise UnsupportedConstruct("lookbehind", at)
                raise UnsupportedConstruct("group extension (?...)", at)
            inner = self.parse_alt()
            if self.peek() != ")":
                raise RegexSyntaxError("missing ')'", self.pos)
            self.pos += 1
            return inner
        if c == "[":
            return self.parse_class(at)
        if c == "\\":
            return self.parse_escape(at)
        if c == ".":
            raise UnsupportedConstruct("wildcard '.'", at)
        if c in "^$":
            raise UnsupportedConstruct(f"anchor {c!r}", at)
        if c in "*+?{":
            raise RegexSyntaxError("nothing to repeat", at)
        if c in ")]}":
            raise RegexSyntaxError(f"unbalanced {c!r}", at)
        return Literal(self.check_char(c, at))

    def parse_escape(self, at: int) -> RegexAst:
        c = self.next()
        if c == "d":
            return AnyDigit()
        if c in _ESCAPABLE:
            return Literal(c)
        if c.isdigit():
            raise UnsupportedConstruct("backreference", at)
        raise UnsupportedConstruct(f"escape \\{c}", at)

    def check_char(self, c: str, at: int) -> str:
        if ord(c) > MAX_CODEPOINT:
            raise UnsupportedConstruct(f"code point U+{ord(c):X} beyond U+{MAX_CODEPOINT:X}", at)
        return c

    def parse_class(self, at: int) -> CharClass:
        if self.peek() == "^":
            raise UnsupportedConstruct("negated character class", at)
        items: list[Range | AnyDigit] = []
        first = True
        while True:
            c = self.peek()
            if c is None:
                raise RegexSyntaxError("missing ']'", self.pos)
            if c == "]":
                if first:
                    raise RegexSyntaxError("empty character class", at)
                self.pos += 1
                return CharClass(tuple(items))
            lo = self.class_char(first)
            first = False
            if self.peek() == "-" and self.text[self.pos + 1:self.pos + 2] not in ("]", ""):
                dash = self.pos
                self.pos += 1
                hi = self.class_char(False)
                if isinstance(lo, AnyDigit) or isinstance(hi, AnyDigit):
                    raise RegexSyntaxError("\\d cannot bound a range", dash)
                if lo > hi:
                    raise RegexSyntaxError(f"bad range {lo}-{hi}", dash)
                items.append(Range(lo, hi))
            elif isinstance(lo, AnyDigit):
                items.append(lo)
            else:
                items.append(Range(lo, lo))

    def class_char(self, first: bool) -> str | AnyDigit:
        at = self.pos
        c = self.next()
        if c == "\\":
            e = self.next()
            if e == "d":
                return AnyDigit()
            if e in _ESCAPABLE:
                return e
            raise UnsupportedConstruct(f"escape \\{e}", at)
        if c == "[":
            raise UnsupportedConstruct("nested class or POSIX class", at)
        if c == "-" and not (first or self.peek() == "]"):
            raise RegexSyntaxError("unescaped '-' in class", at)
        return self.check_char(c, at)


def parse_regex(text: str) -> RegexAst:
    """Parse a pattern of the supported subset into a :data:`RegexAst`.

    Raises :class:`UnsupportedConstruct` for recognisable constructs outside
    the subset (lookaround, ``\\w``, anchors, ...) and
    :class:`RegexSyntaxError` for malformed patterns.
    """
    try:
        return _RegexParser(text).parse()
    except RecursionError:
        raise RegexSyntaxError("pattern nested too deeply", 0) from None


# ---------------------------------------------------------------------------
# printing back to pattern syntax


def to_pattern(r: RegexAst) -> str:
    """Render ``r`` in the concrete syntax accepted by :func:`parse_regex`."""
    return _pat(r, 0)


def _lit(c: str) -> str:
    return "\\" + c if c in _META else c


def _class_char(c: str) -> str:
    return "\\" + c if c in _CLASS_SPECIAL else c


def _pat(r: RegexAst, prec: int) -> str:
    # prec: 0 = alternation context, 1 = concatenation, 2 = quantifier operand
    if isinstance(r, Literal):
        return _lit(r.char)
    if isinstance(r, AnyDigit):
        return "\\d"
    if isinstance(r, CharClass):
        parts = []
        for item in r.items:
            if isinstance(item, AnyDigit):
                parts.append("\\d")
            elif item.lo == item.hi:
                parts.append(_class_char(item.lo))
            else:
                parts.append(f"{_class_char(item.lo)}-{_class_char(item.hi)}")
        return "[" + "".join(parts) + "]"
    if isinstance(r, Concat):
        s = "".join(_pat(x, 2 if isinstance(x, Loop) else 1) for x in r.items)
        return f"({s})" if prec >= 2 or (prec == 1 and not r.items) else s
    if isinstance(r, Alt):
        s = "|".join(_pat(x, 0) for x in r.items)
        return f"({s})" if prec >= 1 else s
    if isinstance(r, Loop):
        inner = _pat(r.inner, 2)
        if isinstance(r.inner, Loop):
            inner = f"({inner})"
        if (r.min, r.max) == (0, None):
            q = "*"
        elif (r.min, r.max) == (1, None):
            q = "+"
        elif (r.min, r.max) == (0, 1):
            q = "?"
        elif r.max is None:
            q = f"{{{r.min},}}"
        else:
            q = f"{{{r.min},{r.max}}}"
        return inner + q
    raise TypeError(f"not a regex node: {r!r}")


# ---------------------------------------------------------------------------
# Thompson NFA
#
# States are integers. ``_eps[s]`` lists epsilon successors; ``_edge[s]`` is
# ``(ranges, target)`` for a consuming state. Simulation keeps a set of live
# states, so each input character costs O(number of states).

_DIGITS = ((ord("0"), ord("9")),)


class _Nfa:
    def __init__(self):
        self.eps: list[list[int]] = []
        self.edge: list[tuple[tuple[tuple[int, int], ...], int] | None] = []
        self.accept = -1

    def new(self) -> int:
        self.eps.append([])
        self.edge.append(None)
        return len(self.eps) - 1

    def build(self, r: RegexAst, start: int) -> int:
        """Wire ``r`` starting at ``start``; return its exit state."""
        if isinstance(r, Literal):
            return self.consume(start, ((ord(r.char), ord(r.char)),))
        if isinstance(r, AnyDigit):
            return self.consume(start, _DIGITS)
        if isinstance(r, CharClass):
            ranges = []
            for item in r.items:
                if isinstance(item, AnyDigit):
                    ranges.extend(_DIGITS)
                else:
                    ranges.append((ord(item.lo), ord(item.hi)))
            return self.consume(start, tuple(ranges))
        if isinstance(r, Concat):
            cur = start
            for item in r.items:
                cur = self.build(item, cur)
            return cur
        if isinstance(r, Alt):
            end = self.new()
            for item in r.items:
                s = self.new()
                self.eps[start].append(s)
                self.eps[self.build(item, s)].append(end)
            return end
        if isinstance(r, Loop):
            cur = start
            for _ in range(r.min):
                cur = self.build(r.inner, cur)
            if r.max is None:
                body = self.new()
                end = self.new()
                self.eps[cur] += [body, end]
                self.eps[self.build(r.inner, body)].append(cur)
                return end
            end = self.new()
            for _ in range(r.max - r.min):
                self.eps[cur].append(end)
                cur = self.build(r.inner, cur)
            self.eps[cur].append(end)
            return end
        raise TypeError(f"not a regex node: {r!r}")

    def consume(self, start: int, ranges) -> int:
        nxt = self.new()
        self.edge[start] = (ranges, nxt)
        return nxt

    def closure(self, states) -> set[int]:
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for t in self.eps[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen


@lru_cache(maxsize=512)
def _compile(r: RegexAst) -> _Nfa:
    nfa = _Nfa()
    start = nfa.new()
    nfa.accept = nfa.build(r, start)
    return nfa


def matches(r: RegexAst, s: str) -> bool:
    """True iff the whole of ``s`` is in the language of ``r``."""
    nfa = _compile(r)
    current = nfa.closure([0])
    for ch in s:
        cp = ord(ch)
        step = []
        for st in current:
            e = nfa.edge[st]
            if e is not None and any(lo <= cp <= hi for lo, hi in e[0]):
                step.append(e[1])
        if not step:
            return False
        current = nfa.closure(step)
    return nfa.accept in current


# ---------------------------------------------------------------------------
# SMT-LIB translation


def smt_string_literal(s: str) -> str:
    """Quote ``s`` as an SMT-LIB 2.6 string literal."""
    out = []
    for ch in s:
        cp = ord(ch)
        if ch == '"':
            out.append('""')
        elif 0x20 <= cp <= 0x7E and ch != "\\":
            out.append(ch)
        else:
            out.append(f"\\u{{{cp:x}}}")
    return '"' + "".join(out) + '"'


def to_smt(r: RegexAst, legacy: bool = False) -> str:
    """Translate ``r`` into an SMT-LIB term of sort ``RegLan``.

    ``legacy`` selects the pre-2.6 dotted names (``str.to.re``, ``re.loop``
    with trailing bounds) understood by older Z3 builds.
    """
    to_re = "str.to.re" if legacy else "str.to_re"

    def rng(lo: str, hi: str) -> str:
        return f"(re.range {smt_string_literal(lo)} {smt_string_literal(hi)})"

    def loop(x: str, lo: int, hi: int) -> str:
        return f"(re.loop {x} {lo} {hi})" if legacy else f"((_ re.loop {lo} {hi}) {x})"

    def tr(node: RegexAst) -> str:
        if isinstance(node, Literal):
            return f"({to_re} {smt_string_literal(node.char)})"
        if isinstance(node, AnyDigit):
            return rng("0", "9")
        if isinstance(node, CharClass):
            parts = [rng("0", "9") if isinstance(i, AnyDigit) else rng(i.lo, i.hi) for i in node.items]
            return parts[0] if len(parts) == 1 else "(re.union " + " ".join(parts) + ")"
        if isinstance(node, Concat):
            parts = []
            run = ""
            for item in node.items:
                if isinstance(item, Literal):
                    run += item.char
                    continue
                if run:
                    parts.append(f"({to_re} {smt_string_literal(run)})")
                    run = ""
                parts.append(tr(item))
            if run or not parts:
                parts.append(f"({to_re} {smt_string_literal(run)})")
            return parts[0] if len(parts) == 1 else "(re.++ " + " ".join(parts) + ")"
        if isinstance(node, Alt):
            return "(re.union " + " ".join(tr(x) for x in node.items) + ")"
        if isinstance(node, Loop):
            x = tr(node.inner)
            if (node.min, node.max) == (0, None):
                return f"(re.* {x})"
            if (node.min, node.max) == (1, None):
                return f"(re.+ {x})"
            if (node.min, node.max) == (0, 1):
                return f"(re.opt {x})"
            if node.max is None:
                return f"(re.++ {loop(x, node.min, node.min)} (re.* {x}))"
            return loop(x, node.min, node.max)
        raise TypeError(f"not a regex node: {node!r}")

    return tr(r)


def regex_sort(legacy: bool = False) -> str:
    return "(RegEx String)" if legacy else "RegLan"
