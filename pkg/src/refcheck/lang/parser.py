"""Recursive-descent parser for ``.rj`` sources.

Grammar (``//`` comments, whitespace insignificant, ``;`` optional)::

    program   := { "type" IDENT ":" texpr
                 | "operation" IDENT "(" tname ")" "(" tname ")"
                 | "main" "{" { proc } "}" }
    texpr     := tterm { "|" tterm }
    tterm     := BASIC [ "(" refinement ")" ] [ "{" { field } "}" ] | IDENT
    field     := "." NAME [ "*" | "?" ] ":" texpr
    proc      := IDENT "(" IDENT [ ":" tname ] ")" "{" { call } "}"
    call      := IDENT [ "@" IDENT ] "(" NAME { "." NAME } ")" "(" IDENT ")"
"""

from __future__ import annotations

import bisect
import re

from ..errors import (
    DuplicateName,
    ParseError,
    PredicateSyntaxError,
    NonlinearTerm,
    RefinementKindError,
    RegexSyntaxError,
    UnknownVariable,
    UnsupportedConstruct,
)
from ..predicate import infer_binder, parse_predicate
from ..regex import parse_regex
from .ast import (
    BASIC_NAMES,
    MANY,
    ONE,
    OPTIONAL,
    BasicKind,
    CallStmt,
    Choice,
    Field,
    NamedRef,
    Node,
    OperationDecl,
    Path,
    Pos,
    PredicateRefinement,
    Procedure,
    Program,
    RegexRefinement,
    TypeDecl,
)

KEYWORDS = {"type", "operation", "main"} | set(BASIC_NAMES)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PUNCT = set(":{}()|.*?;@,")
_STRING_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


class Token:
    __slots__ = ("kind", "value", "offset", "offsets")

    def __init__(self, kind: str, value: str, offset: int, offsets=None):
        self.kind = kind  # 'ident', 'string', 'punct', 'eof'
        self.value = value
        self.offset = offset
        self.offsets = offsets  # for strings: source offset of each decoded char

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "string":
            return "string literal"
        return repr(self.value)


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def pos(self, offset: int) -> Pos:
        line = bisect.bisect_right(self.line_starts, offset)
        return Pos(line, offset - self.line_starts[line - 1] + 1)

    def error(self, expected: str, offset: int, found: str | None = None) -> ParseError:
        p = self.pos(offset)
        return ParseError(expected, p.line, p.col, found)

    def skip_trivia(self) -> None:
        text = self.text
        while self.i < len(text):
            c = text[self.i]
            if c in " \t\r\n":
                self.i += 1
            elif text.startswith("//", self.i):
                nl = text.find("\n", self.i)
                self.i = len(text) if nl < 0 else nl + 1
            else:
                break

    def next(self) -> Token:
        self.skip_trivia()
        text = self.text
        start = self.i
        if start >= len(text):
            return Token("eof", "", start)
        c = text[start]
        m = _IDENT.match(text, start)
        if m:
            self.i = m.end()
            return Token("ident", m.group(), start)
        if c == '"':
            return self.string()
        if c in _PUNCT:
            self.i += 1
            return Token("punct", c, start)
        raise self.error("a token", start, repr(c))

    def string(self) -> Token:
        start = self.i
        self.i += 1
        chars: list[str] = []
        offsets: list[int] = []
        text = self.text
        while True:
            if self.i >= len(text) or text[self.i] == "\n":
                raise self.error("closing '\"'", self.i)
            c = text[self.i]
            if c == '"':
                self.i += 1
                return Token("string", "".join(chars), start, offsets)
            offsets.append(self.i)
            if c == "\\":
                e = text[self.i + 1:self.i + 2]
                if e not in _STRING_ESCAPES:
                    raise self.error("a string escape (\\\\, \\\", \\n, \\t, \\r)", self.i, repr("\\" + e))
                chars.append(_STRING_ESCAPES[e])
                self.i += 2
            else:
                chars.append(c)
                self.i += 1

    def raw_until_close(self, open_offset: int) -> tuple[str, int]:
        """Return the text up to the ``)`` matching an already-consumed ``(``."""
        depth = 1
        start = self.i
        text = self.text
        while self.i < len(text):
            c = text[self.i]
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    raw = text[start:self.i]
                    self.i += 1
                    return raw, start
            self.i += 1
        raise self.error("')' closing the refinement", open_offset)


class Parser:
    def __init__(self, text: str):
        self.lex = Lexer(text)
        self.tok = self.lex.next()

    # -- token helpers -----------------------------------------------------

    def advance(self) -> Token:
        tok = self.tok
        self.tok = self.lex.next()
        return tok

    def pos(self, tok: Token | None = None) -> Pos:
        return self.lex.pos((tok or self.tok).offset)

    def fail(self, expected: str):
        raise self.lex.error(expected, self.tok.offset, self.tok.describe())

    def is_punct(self, value: str) -> bool:
        return self.tok.kind == "punct" and self.tok.value == value

    def expect_punct(self, value: str) -> Token:
        if not self.is_punct(value):
            self.fail(repr(value))
        return self.advance()

    def accept_punct(self, value: str) -> bool:
        if self.is_punct(value):
            self.advance()
            return True
        return False

    def is_keyword(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.value == word

    def expect_ident(self, what: str = "identifier", allow_keywords: bool = False) -> Token:
        if self.tok.kind != "ident" or (not allow_keywords and self.tok.value in KEYWORDS):
            self.fail(what)
        return self.advance()

    def expect_type_name(self) -> Token:
        if self.tok.kind != "ident" or self.tok.value in ("type", "operation", "main"):
            self.fail("type name")
        return self.advance()

    def duplicate(self, what: str, tok: Token) -> DuplicateName:
        p = self.pos(tok)
        return DuplicateName(f"{what} {tok.value!r}", p.line, p.col)

    # -- declarations -------------------------------------------------------

    def parse_program(self) -> Program:
        types: list[TypeDecl] = []
        ops: list[OperationDecl] = []
        procs: list[Procedure] = []
        seen_types: set[str] = set()
        seen_ops: set[str] = set()
        seen_procs: set[str] = set()
        while self.tok.kind != "eof":
            if self.accept_punct(";"):
                continue
            if self.is_keyword("type"):
                self.advance()
                name = self.expect_ident("type name")
                if name.value in seen_types:
                    raise self.duplicate("type", name)
                seen_types.add(name.value)
                self.expect_punct(":")
                types.append(TypeDecl(name.value, self.parse_texpr(), self.pos(name)))
            elif self.is_keyword("operation"):
                start = self.advance()
                name = self.expect_ident("operation name")
                if name.value in seen_ops:
                    raise self.duplicate("operation", name)
                seen_ops.add(name.value)
                self.expect_punct("(")
                req = self.expect_type_name()
                self.expect_punct(")")
                self.expect_punct("(")
                resp = self.expect_type_name()
                self.expect_punct(")")
                ops.append(OperationDecl(name.value, req.value, resp.value, self.pos(start)))
            elif self.is_keyword("main"):
                self.advance()
                self.expect_punct("{")
                while not self.is_punct("}"):
                    if self.accept_punct(";"):
                        continue
                    proc = self.parse_procedure()
                    if proc.name in seen_procs:
                        raise DuplicateName(f"procedure {proc.name!r}", proc.pos.line, proc.pos.col)
                    seen_procs.add(proc.name)
                    procs.append(proc)
                self.advance()
            else:
                self.fail("'type', 'operation' or 'main'")
        return Program(tuple(types), tuple(ops), tuple(procs))

    # -- types ----------------------------------------------------------------

    def parse_texpr(self):
        start = self.tok
        alts = [self.parse_tterm()]
        while self.accept_punct("|"):
            alts.append(self.parse_tterm())
        if len(alts) == 1:
            return alts[0]
        return Choice(tuple(alts), self.pos(start))

    def parse_tterm(self):
        tok = self.tok
        if tok.kind != "ident" or tok.value in ("type", "operation", "main"):
            self.fail("type")
        self.advance()
        if tok.value not in BASIC_NAMES:
            return NamedRef(tok.value, self.pos(tok))
        basic = BASIC_NAMES[tok.value]
        refinement = None
        if self.is_punct("("):
            refinement = self.parse_refinement(basic, self.tok)
        children: tuple[Field, ...] = ()
        if self.is_punct("{"):
            children = self.parse_children()
        return Node(basic, refinement, children, self.pos(tok))

    def parse_refinement(self, basic: BasicKind, open_tok: Token):
        # The lexer sits just past '(' here: the lookahead token is '(' itself.
        if basic in (BasicKind.VOID, BasicKind.BOOL):
            p = self.pos(open_tok)
            raise RefinementKindError(f"{basic} cannot be refined", p.line, p.col)
        if basic is BasicKind.STRING:
            self.advance()
            if self.tok.kind != "string":
                p = self.pos()
                raise RefinementKindError("string refinements must be a quoted regular expression", p.line, p.col)
            lit = self.advance()
            try:
                regex = parse_regex(lit.value)
            except (RegexSyntaxError, UnsupportedConstruct) as e:
                at = lit.offsets[e.position] if e.position < len(lit.offsets) else lit.offset
                p = self.lex.pos(at)
                e.line, e.col = p.line, p.col
                raise
            self.expect_punct(")")
            return RegexRefinement(regex)
        raw, raw_start = self.lex.raw_until_close(open_tok.offset)
        if raw.lstrip().startswith('"'):
            p = self.lex.pos(raw_start)
            raise RefinementKindError(f"regular expression refinement on {basic}", p.line, p.col)
        try:
            binder = infer_binder(raw)
            pred = parse_predicate(raw, binder)
        except (PredicateSyntaxError, UnknownVariable, NonlinearTerm) as e:
            p = self.lex.pos(raw_start)
            e.line, e.col = p.line, p.col
            raise
        self.tok = self.lex.next()
        return PredicateRefinement(binder, pred)

    def parse_children(self) -> tuple[Field, ...]:
        self.expect_punct("{")
        fields: list[Field] = []
        names: set[str] = set()
        while not self.is_punct("}"):
            dot = self.expect_punct(".")
            name = self.expect_ident("field name", allow_keywords=True)
            if name.value in names:
                raise self.duplicate("field", name)
            names.add(name.value)
            card = ONE
            if self.accept_punct("*"):
                card = MANY
            elif self.accept_punct("?"):
                card = OPTIONAL
            self.expect_punct(":")
            fields.append(Field(name.value, card, self.parse_texpr(), self.pos(dot)))
        self.advance()
        return tuple(fields)

    # -- behaviour ------------------------------------------------------------

    def parse_procedure(self) -> Procedure:
        name = self.expect_ident("procedure name")
        self.expect_punct("(")
        param = self.expect_ident("parameter name")
        param_type = None
        if self.accept_punct(":"):
            param_type = self.expect_type_name().value
        self.expect_punct(")")
        self.expect_punct("{")
        body: list[CallStmt] = []
        while not self.is_punct("}"):
            if self.accept_punct(";"):
                continue
            body.append(self.parse_call())
        self.advance()
        return Procedure(name.value, param.value, param_type, tuple(body), self.pos(name))

    def parse_call(self) -> CallStmt:
        op = self.expect_ident("operation name")
        if self.accept_punct("@"):
            self.expect_ident("port name")  # ports are not modelled
        self.expect_punct("(")
        base = self.expect_ident("variable")
        fields = []
        while self.accept_punct("."):
            fields.append(self.expect_ident("field name", allow_keywords=True).value)
        self.expect_punct(")")
        self.expect_punct("(")
        out = self.expect_ident("output variable")
        self.expect_punct(")")
        path = Path(base.value, tuple(fields), self.pos(base))
        return CallStmt(op.value, path, out.value, self.pos(op))


def parse_program(text: str | bytes) -> Program:
    """Parse ``.rj`` source text into a :class:`Program`.

    Raises a :class:`~refcheck.errors.RefcheckError` subclass (always with a
    1-based line/column) on malformed input.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError("UTF-8 text", 1, 1, f"undecodable byte at offset {e.start}") from None
    try:
        return Parser(text).parse_program()
    except RecursionError:
        raise ParseError("shallower nesting", 1, 1) from None
