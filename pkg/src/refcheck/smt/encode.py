"""Compile a resolved program into SMT-LIB verification conditions.

Everything is phrased through one uninterpreted typing relation
``HasType : Term x Type -> Bool``. Solver-native values enter the ``Term``
sort through box/unbox function pairs; refined types get an iff-axiom,
tree types get an implication axiom over their projection functions, and
each operation gets an axiom mapping its request type to its response type.

A call site is well-typed when the negation of its typing goal is
unsatisfiable. The negated goal is Skolemized here: the procedure parameter
becomes a fresh constant constrained by its declared type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import PathThroughScalar
from ..lang.ast import BASIC_NAMES, BasicKind, Cardinality, Choice, NamedRef, Node, Pos, PredicateRefinement, RegexRefinement, TypeRef
from ..lang.resolve import ResolvedProgram
from ..predicate import to_smt as predicate_to_smt
from ..regex import regex_sort, to_smt as regex_to_smt
from .script import Command, SmtScript, symbol

# kind -> (solver sort, box function, unbox function)
BOXES = {
    BasicKind.BOOL: ("Bool", "BoxBool", "bool-term-val"),
    BasicKind.INT: ("Int", "BoxInt", "int-term-val"),
    BasicKind.DOUBLE: ("Real", "BoxDouble", "double-term-val"),
    BasicKind.STRING: ("String", "BoxString", "string-term-val"),
}
VOID_UNIT = "void-unit"

# Plain identifiers that would clash with prelude or SMT-LIB symbols.
RESERVED = {
    "Type", "Term", "HasType", "BoxBool", "BoxInt", "BoxDouble", "BoxString",
    "Bool", "Int", "Real", "String", "RegLan", "RegEx", "Array", "Seq",
    "and", "or", "not", "xor", "ite", "distinct", "true", "false", "let",
    "forall", "exists", "match", "par", "as", "iff", "implies", "abs", "div",
    "mod", "rem", "to_real", "to_int", "is_int", "select", "store", "const",
    "concat", "extract", "NUMERAL", "DECIMAL", "STRING", "BINARY", "HEXADECIMAL",
}


@dataclass(frozen=True)
class EncodeOptions:
    legacy_names: bool = False
    timeout_ms: Optional[int] = 10000
    produce_models: bool = True
    skolemize: bool = True

    @property
    def iff(self) -> str:
        return "iff" if self.legacy_names else "="

    @property
    def implies(self) -> str:
        return "implies" if self.legacy_names else "=>"

    @property
    def in_re(self) -> str:
        return "str.in.re" if self.legacy_names else "str.in_re"


class SymbolTable:
    """Injective naming of types, projections, operations and Skolem constants.

    Source identifiers never contain ``.``, ``/`` or ``$``, so those characters
    separate the generated namespaces: ``T.f`` projections, ``T/f`` anonymous
    inline types, ``$x`` Skolem constants. Names clashing with reserved
    symbols (or, for operations, with a type) move under ``type.`` /
    ``operation.``, which cannot clash because both words are keywords.
    """

    def __init__(self, rp: ResolvedProgram):
        self.type_names = set(rp.types)

    def type(self, name: str) -> str:
        if name in BASIC_NAMES:
            return name
        return f"type.{name}" if name in RESERVED else name

    def projection(self, type_symbol: str, field_name: str) -> str:
        return f"{type_symbol}.{field_name}"

    def anonymous(self, parent_symbol: str, step: str) -> str:
        return f"{parent_symbol}/{step}"

    def operation(self, name: str) -> str:
        if name in RESERVED or name in self.type_names or name in BASIC_NAMES:
            return f"operation.{name}"
        return name

    def skolem(self, var: str) -> str:
        return f"${var}"

    def regex(self, type_symbol: str) -> str:
        return f"{type_symbol}-re"


@dataclass(eq=False)
class TypeEntry:
    """What the encoder knows statically about one SMT Type constant."""

    symbol: str
    kind: str  # 'basic' | 'alias' | 'refined' | 'tree' | 'choice'
    basic: Optional[BasicKind] = None
    target: Optional["TypeEntry"] = None
    fields: dict[str, tuple[Cardinality, "TypeEntry"]] = field(default_factory=dict)
    alternatives: list["TypeEntry"] = field(default_factory=list)
    display: str = ""

    def unaliased(self) -> "TypeEntry":
        e = self
        while e.kind == "alias":
            e = e.target
        return e


@dataclass
class EncodingStats:
    refinement_axioms: int = 0
    tree_axioms: int = 0
    projections: int = 0
    choice_axioms: int = 0
    alias_axioms: int = 0
    operation_axioms: int = 0
    opaque_fields: list[str] = field(default_factory=list)


def encode_prelude(opts: EncodeOptions = EncodeOptions()) -> SmtScript:
    """Sorts, the typing relation and one box/unbox block per basic kind."""
    s = SmtScript()
    if opts.produce_models:
        s.set_option("produce-models", "true")
    if opts.timeout_ms is not None:
        s.set_option("timeout", str(opts.timeout_ms))
    s.declare_sort("Type", "notions of types, terms and typing relation")
    s.declare_sort("Term")
    s.declare_fun("HasType", ("Term", "Type"), "Bool")
    s.declare_fun("void", (), "Type", "type void: a single unit value")
    s.declare_fun(VOID_UNIT, (), "Term")
    s.assert_(f"(HasType {VOID_UNIT} void)")
    for kind, (sort, box, unbox) in BOXES.items():
        s.declare_fun(kind.value, (), "Type", f"type {kind.value}, boxed from the solver's {sort}")
        s.declare_fun(box, (sort,), "Term")
        s.declare_fun(unbox, ("Term",), sort)
        s.assert_(f"(forall ((v {sort})) (= ({unbox} ({box} v)) v))")
        s.assert_(f"(forall ((v {sort})) (HasType ({box} v) {kind.value}))")
    return s


def _conj(parts: list[str]) -> str:
    if not parts:
        return "true"
    return parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"


class Encoder:
    def __init__(self, rp: ResolvedProgram, opts: EncodeOptions = EncodeOptions()):
        self.rp = rp
        self.opts = opts
        self.names = SymbolTable(rp)
        self.stats = EncodingStats()
        self.axioms = SmtScript()
        self.entries: dict[str, TypeEntry] = {}
        self.basic_entries = {k: TypeEntry(k.value, "basic", basic=k, display=k.value) for k in BasicKind}
        self._encoded = False

    # -- types ------------------------------------------------------------

    def entry(self, name: str) -> TypeEntry:
        """Entry for a declared or basic type name, encoding it on first use."""
        if name in BASIC_NAMES:
            return self.basic_entries[BASIC_NAMES[name]]
        if name not in self.entries:
            decl = self.rp.types[name]
            self.entries[name] = self.encode_type_decl(name, decl.type)
        return self.entries[name]

    def encode_type_decl(self, name: str, t: TypeRef) -> TypeEntry:
        return self._define(self.names.type(name), t, f"type {name}", name)

    def _child(self, t: TypeRef, anon_symbol: str, display: str) -> TypeEntry:
        if isinstance(t, NamedRef):
            return self.entry(t.name)
        if isinstance(t, Node) and t.refinement is None and not t.children:
            return self.basic_entries[t.basic]
        return self._define(anon_symbol, t, f"inline type {display}", display)

    def _define(self, sym: str, t: TypeRef, comment: str, display: str) -> TypeEntry:
        s = self.axioms
        iff, implies = self.opts.iff, self.opts.implies
        if isinstance(t, NamedRef) or (isinstance(t, Node) and t.refinement is None and not t.children):
            target = self.entry(t.name) if isinstance(t, NamedRef) else self.basic_entries[t.basic]
            s.declare_fun(sym, (), "Type", f"{comment}: alias of {target.display}")
            s.assert_(f"(forall ((x Term)) ({iff} (HasType x {symbol(sym)}) (HasType x {symbol(target.symbol)})))")
            self.stats.alias_axioms += 1
            return TypeEntry(sym, "alias", target=target, display=display)

        if isinstance(t, Choice):
            alts = [self._child(a, self.names.anonymous(sym, str(i)), f"{display}/{i}") for i, a in enumerate(t.alternatives)]
            s.declare_fun(sym, (), "Type", f"{comment}: choice")
            disj = " ".join(f"(HasType x {symbol(a.symbol)})" for a in alts)
            s.assert_(f"(forall ((x Term)) ({iff} (HasType x {symbol(sym)}) (or {disj})))")
            self.stats.choice_axioms += 1
            return TypeEntry(sym, "choice", alternatives=alts, display=display)

        refinement_term = self._refinement_term(sym, t)
        if not t.children:
            s.declare_fun(sym, (), "Type", f"{comment}: refines {t.basic}")
            if refinement_term[0] is not None:
                s.commands.append(refinement_term[0])
            body = _conj([f"(HasType x {t.basic.value})", refinement_term[1]("x")])
            s.assert_(f"(forall ((x Term)) ({iff} (HasType x {symbol(sym)}) {body}))")
            self.stats.refinement_axioms += 1
            return TypeEntry(sym, "refined", basic=t.basic, display=display)

        fields: dict[str, tuple[Cardinality, TypeEntry]] = {}
        for f in t.children:
            fields[f.name] = (f.card, self._child(f.type, self.names.anonymous(sym, f.name), f"{display}.{f.name}"))
        s.declare_fun(sym, (), "Type", f"{comment}: tree")
        if refinement_term[0] is not None:
            s.commands.append(refinement_term[0])
        conjuncts = []
        if t.refinement is not None:
            conjuncts.append(refinement_term[1]("t"))
        for fname, (card, child) in fields.items():
            if not card.is_single:
                self.stats.opaque_fields.append(f"{display}.{fname}")
                continue
            proj = self.names.projection(sym, fname)
            s.declare_fun(proj, ("Term",), "Term")
            self.stats.projections += 1
            conjuncts.append(f"(HasType ({symbol(proj)} t) {symbol(child.symbol)})")
        if conjuncts:
            s.assert_(f"(forall ((t Term)) ({implies} (HasType t {symbol(sym)}) {_conj(conjuncts)}))")
            self.stats.tree_axioms += 1
        return TypeEntry(sym, "tree", basic=t.basic, fields=fields, display=display)

    def _refinement_term(self, sym: str, t: Node):
        """(optional define-fun command, function from bound variable to constraint)."""
        r = t.refinement
        if isinstance(r, RegexRefinement):
            re_sym = self.names.regex(sym)
            define = Command(
                f"(define-fun {symbol(re_sym)} () {regex_sort(self.opts.legacy_names)} "
                f"{regex_to_smt(r.regex, self.opts.legacy_names)})"
            )
            unbox = BOXES[BasicKind.STRING][2]
            return define, lambda v: f"({self.opts.in_re} ({unbox} {v}) {symbol(re_sym)})"
        if isinstance(r, PredicateRefinement):
            sort, _, unbox = BOXES[t.basic]
            return None, lambda v: predicate_to_smt(r.pred, f"({unbox} {v})", sort)
        return None, lambda v: "true"

    # -- operations -----------------------------------------------------------

    def encode_operation(self, name: str) -> None:
        op = self.rp.operations[name]
        req, resp = self.entry(op.request), self.entry(op.response)
        sym = self.names.operation(name)
        self.axioms.declare_fun(sym, ("Term",), "Term", f"{name} : {op.request} -> {op.response}")
        self.axioms.assert_(
            f"(forall ((x Term)) ({self.opts.implies} (HasType x {symbol(req.symbol)}) "
            f"(HasType ({symbol(sym)} x) {symbol(resp.symbol)})))"
        )
        self.stats.operation_axioms += 1

    def encode(self) -> SmtScript:
        if not self._encoded:
            for name in self.rp.types:
                self.entry(name)
            for name in self.rp.operations:
                self.encode_operation(name)
            self._encoded = True
        return self.axioms


@dataclass(frozen=True)
class Vc:
    procedure: str
    call_index: int
    goal_description: str
    script: SmtScript
    goal_term: str
    expected_type: str
    pos: Optional[Pos] = None
    argument: str = ""

    @property
    def filename(self) -> str:
        return f"{self.procedure}.{self.call_index}.smt2"


@dataclass(frozen=True)
class ResidualCheck:
    """A call-site obligation left to the runtime validator."""

    procedure: str
    call_index: int
    goal_description: str
    argument: str
    expected_type: str
    reason: str
    pos: Optional[Pos] = None


@dataclass(frozen=True)
class StaticTypeError:
    procedure: str
    call_index: int
    goal_description: str
    error: PathThroughScalar
    pos: Optional[Pos] = None


CallSite = Union[Vc, ResidualCheck, StaticTypeError]


@dataclass
class _Binding:
    term: Optional[str]  # None: only known dynamically
    entry: TypeEntry


class _Opaque(Exception):
    pass


def _project(binding: _Binding, fields: tuple[str, ...], names: SymbolTable) -> _Binding:
    term, entry = binding.term, binding.entry
    for f in fields:
        e = entry.unaliased()
        if e.kind == "choice":
            raise _Opaque(f"projection .{f} out of choice type {e.display}")
        if e.kind != "tree":
            raise PathThroughScalar(f"cannot project .{f} out of scalar type {e.display}")
        if f not in e.fields:
            raise PathThroughScalar(f"type {e.display} has no field .{f}")
        card, child = e.fields[f]
        if not card.is_single:
            raise _Opaque(f"field {e.display}.{f} has cardinality {card} and is checked only at runtime")
        term = f"({symbol(names.projection(e.symbol, f))} {term})"
        entry = child
    return _Binding(term, entry)


def generate_call_sites(rp: ResolvedProgram, opts: EncodeOptions = EncodeOptions()) -> list[CallSite]:
    """One :class:`Vc`, :class:`ResidualCheck` or :class:`StaticTypeError` per call, in source order."""
    enc = Encoder(rp, opts)
    base = encode_prelude(opts) + enc.encode()
    names = enc.names
    out: list[CallSite] = []
    for proc in rp.procedures:
        param_sym = names.skolem(proc.param)
        env = {proc.param: _Binding(symbol(param_sym), enc.entry(proc.param_type))}
        # (symbol, type symbol) of every Skolem constant introduced so far
        skolems = [(param_sym, enc.entry(proc.param_type).symbol)]
        for i, call in enumerate(proc.body):
            op = rp.operations[call.operation]
            req = enc.entry(op.request)
            desc = f"argument `{call.argument}` of {call.operation} must have type {op.request}"
            site: CallSite
            bound = env[call.argument.base]
            try:
                if bound.term is None:
                    raise _Opaque(f"`{call.argument.base}` is only known at runtime")
                arg = _project(bound, call.argument.fields, names)
                script = SmtScript(list(base.commands))
                goal = f"(HasType {arg.term} {symbol(req.symbol)})"
                _add_goal(script, skolems, goal, proc.name, i, opts)
                site = Vc(proc.name, i, desc, script, arg.term, op.request, call.pos, str(call.argument))
            except _Opaque as why:
                arg = None
                site = ResidualCheck(proc.name, i, desc, str(call.argument), op.request, str(why), call.pos)
            except PathThroughScalar as err:
                arg = None
                if call.argument.pos:
                    err.line, err.col = call.argument.pos.line, call.argument.pos.col
                site = StaticTypeError(proc.name, i, desc, err, call.pos)
            out.append(site)
            resp = enc.entry(op.response)
            if arg is not None:
                env[call.output] = _Binding(f"({symbol(names.operation(call.operation))} {arg.term})", resp)
            else:
                # The runtime check on the argument guarantees the declared response type.
                sk = names.skolem(call.output)
                skolems.append((sk, resp.symbol))
                env[call.output] = _Binding(symbol(sk), resp)
    return out


def _add_goal(script: SmtScript, skolems, goal: str, proc: str, index: int, opts: EncodeOptions) -> None:
    comment = f"type checking for {proc}, call {index}"
    if opts.skolemize:
        first = True
        for sk, ty in skolems:
            script.declare_fun(sk, (), "Term", comment if first else None)
            script.assert_(f"(HasType {symbol(sk)} {symbol(ty)})")
            first = False
        script.assert_(f"(not {goal})")
    else:
        binders = " ".join(f"({symbol(sk)} Term)" for sk, _ in skolems)
        hyps = _conj([f"(HasType {symbol(sk)} {symbol(ty)})" for sk, ty in skolems])
        script.assert_(f"(not (forall ({binders}) ({opts.implies} {hyps} {goal})))", comment)
    script.check_sat()


def generate_vcs(rp: ResolvedProgram, opts: EncodeOptions = EncodeOptions()) -> list[Vc]:
    """Verification conditions for every statically checkable call site.

    Raises :class:`PathThroughScalar` for the first call whose argument path
    projects a field its type does not have.
    """
    sites = generate_call_sites(rp, opts)
    for s in sites:
        if isinstance(s, StaticTypeError):
            raise s.error
    return [s for s in sites if isinstance(s, Vc)]


def encode_program(rp: ResolvedProgram, opts: EncodeOptions = EncodeOptions()) -> tuple[SmtScript, EncodingStats]:
    """Prelude plus all type and operation axioms (no goal)."""
    enc = Encoder(rp, opts)
    return encode_prelude(opts) + enc.encode(), enc.stats
