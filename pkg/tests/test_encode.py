import re
import shutil
import subprocess
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings

from refcheck.cli import CheckConfig, cmd_emit_smt
from refcheck.errors import PathThroughScalar
from refcheck.lang import parse_program, resolve
from refcheck.lang.ast import Choice, NamedRef
from refcheck.smt import (
    EncodeOptions,
    ResidualCheck,
    SmtScript,
    StaticTypeError,
    Vc,
    encode_prelude,
    encode_program,
    generate_call_sites,
    generate_vcs,
    symbol,
)
from refcheck.solver import SolverConfig, Timeout, Unknown, Unsat, run_script

from strategies import programs

HERE = Path(__file__).parent
PROGRAMS = HERE / "fixtures" / "programs"
NEWS = PROGRAMS / "news_board.rj"
GOLDEN = HERE / "golden"

needs_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not on PATH")


def news():
    return resolve(parse_program(NEWS.read_text()))


def test_prelude_string_block_shape():
    text = encode_prelude().render()
    for line in [
        "(declare-sort Type 0)",
        "(declare-sort Term 0)",
        "(declare-fun HasType (Term Type) Bool)",
        "(declare-fun BoxString (String) Term)",
        "(declare-fun string-term-val (Term) String)",
        "(assert (forall ((v String)) (= (string-term-val (BoxString v)) v)))",
        "(assert (forall ((v String)) (HasType (BoxString v) string)))",
        "(set-option :produce-models true)",
        "(set-option :timeout 10000)",
    ]:
        assert line in text.splitlines(), line


def test_prelude_void_block():
    lines = encode_prelude().render().splitlines()
    void = [x for x in lines if "void" in x and not x.startswith(";")]
    assert void == ["(declare-fun void () Type)", "(declare-fun void-unit () Term)", "(assert (HasType void-unit void))"]


@needs_z3
def test_prelude_entails_boxed_int_typing():
    script = encode_prelude().render() + "(assert (not (HasType (BoxInt 5) int)))\n(check-sat)\n"
    assert isinstance(run_script(SolverConfig(timeout_ms=5000), script), Unsat)


def test_news_board_axiom_shapes():
    script, stats = encode_program(news())
    text = script.render()
    assert "(assert (forall ((x Term)) (= (HasType x guid) (and (HasType x string) (str.in_re (string-term-val x) guid-re)))))" in text
    assert ("(assert (forall ((t Term)) (=> (HasType t user) (and (HasType (user.uid t) guid) "
            "(HasType (user.name t) string) (HasType (user.age t) user/age)))))") in text
    assert "(> (int-term-val x) 18)" in text
    assert ("(assert (forall ((x Term)) (=> (HasType x string) (HasType (find_user_by_name x) user))))") in text
    assert "(declare-fun find_user_by_name (Term) Term)" in text
    # the starred child gets no projection
    assert "posts.post" not in text
    assert "(declare-fun posts () Type)" in text
    assert stats.opaque_fields == ["posts.post"]


def test_news_board_goals():
    vcs = generate_vcs(news())
    goals = {(v.procedure, v.call_index): v.goal_term for v in vcs}
    assert goals[("all_posts_by_user", 1)] == "(user.uid (find_user_by_name $name))"
    assert goals[("all_posts_by_user2", 1)] == "(user.name (find_user_by_name $name))"
    vc = next(v for v in vcs if (v.procedure, v.call_index) == ("all_posts_by_user", 1))
    assert vc.expected_type == "guid"
    assert vc.filename == "all_posts_by_user.1.smt2"
    assert "`user.uid`" in vc.goal_description and "guid" in vc.goal_description
    text = vc.script.render()
    assert text.endswith("(declare-fun $name () Term)\n(assert (HasType $name string))\n"
                         "(assert (not (HasType (user.uid (find_user_by_name $name)) guid)))\n(check-sat)\n")
    assert text.count("(check-sat)") == 1


def test_empty_body_yields_no_vcs():
    rp = resolve(parse_program("operation op(string)(string)\nmain { p(x: string) { } }"))
    assert generate_vcs(rp) == []


def test_path_through_scalar():
    rp = resolve(parse_program("operation op(string)(string)\nmain { p(x: string) { op(x.y)(z) } }"))
    with pytest.raises(PathThroughScalar):
        generate_vcs(rp)
    (site,) = generate_call_sites(rp)
    assert isinstance(site, StaticTypeError)


def test_opaque_paths_become_residual_checks():
    src = (PROGRAMS / "opaque_then_ill.rj").read_text()
    sites = generate_call_sites(resolve(parse_program(src)))
    assert [type(s) for s in sites] == [Vc, ResidualCheck, StaticTypeError]
    assert sites[1].argument == "pg.item.id"
    assert sites[1].expected_type == "int"


def test_choice_projection_is_opaque():
    src = """
    type a: void { .f: string }
    type b: void { .f: int }
    type ab: a | b
    operation get(string)(ab)
    operation use(string)(void)
    main { p(x: string) { get(x)(v); use(v.f)(w) } }
    """
    sites = generate_call_sites(resolve(parse_program(src)))
    assert isinstance(sites[1], ResidualCheck)


def test_reserved_names_are_renamed():
    src = """
    type Int: void { .and: string .x: int(v > 0) }
    type user: Int
    operation user2(Int)(Int)
    operation user(user)(user)
    """
    text, _ = encode_program(resolve(parse_program(src)))
    text = text.render()
    assert "(declare-fun type.Int () Type)" in text
    assert "(declare-fun type.Int.and (Term) Term)" in text
    assert "(declare-fun operation.user (Term) Term)" in text
    assert "(declare-fun user2 (Term) Term)" in text


def test_symbol_quoting():
    assert symbol("user.uid") == "user.uid"
    assert symbol("$name") == "$name"
    assert symbol("a b") == "|a b|"
    assert symbol("9lives") == "|9lives|"
    with pytest.raises(ValueError):
        symbol("a|b")


# ---------------------------------------------------------------------------
# axiom-count law, counted independently from the syntax tree


def _walk(t, counts):
    if isinstance(t, NamedRef):
        return
    if isinstance(t, Choice):
        counts["choice"] += 1
        for a in t.alternatives:
            _walk(a, counts)
        return
    if not t.children:
        if t.refinement is not None:
            counts["T"] += 1
        return
    single = [f for f in t.children if f.card.is_single]
    if single or t.refinement is not None:
        counts["U"] += 1
    counts["k"] += len(single)
    for f in t.children:
        _walk(f.type, counts)


def law_counts(p):
    counts = {"T": 0, "U": 0, "k": 0, "choice": 0}
    for d in p.types:
        _walk(d.type, counts)
    counts["O"] = len(p.operations)
    return counts


def text_counts(text: str):
    ops = len(re.findall(r"^\(assert \(forall \(\(x Term\)\) \(=> ", text, re.M))
    fun1 = len(re.findall(r"^\(declare-fun \S+ \(Term\) Term\)$", text, re.M))
    return {
        "T": len(re.findall(r"^\(assert \(forall \(\(x Term\)\) \(= \(HasType x \S+\) \(and \(HasType x (int|double|string)\) ", text, re.M)),
        "U": len(re.findall(r"^\(assert \(forall \(\(t Term\)\) \(=> ", text, re.M)),
        "k": fun1 - ops,
        "O": ops,
    }


def test_axiom_count_law_news_board():
    script, stats = encode_program(news())
    got = text_counts(script.render())
    assert got == {"T": 2, "U": 2, "k": 6, "O": 4}
    assert (stats.refinement_axioms, stats.tree_axioms, stats.projections, stats.operation_axioms) == (2, 2, 6, 4)


@given(programs())
@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_axiom_count_law_generated(p):
    rp = resolve(p)
    script, stats = encode_program(rp)
    want = law_counts(p)
    got = text_counts(script.render())
    assert got == {k: want[k] for k in ("T", "U", "k", "O")}
    assert stats.refinement_axioms == want["T"]
    assert stats.tree_axioms == want["U"]
    assert stats.projections == want["k"]
    assert stats.operation_axioms == want["O"]
    assert stats.choice_axioms == want["choice"]


# ---------------------------------------------------------------------------
# determinism and golden files


def test_emit_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cmd_emit_smt(NEWS, a, CheckConfig())
    cmd_emit_smt(NEWS, b, CheckConfig())
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


@pytest.mark.parametrize("variant,legacy", [("news_board", False), ("news_board_legacy", True)])
def test_golden_files(tmp_path, variant, legacy):
    cmd_emit_smt(NEWS, tmp_path, CheckConfig(legacy_smt_names=legacy))
    golden = GOLDEN / variant
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(p.name for p in golden.iterdir())
    for p in golden.iterdir():
        assert (tmp_path / p.name).read_bytes() == p.read_bytes(), p.name


# ---------------------------------------------------------------------------
# solver-facing properties

CORPUS = sorted(PROGRAMS.rglob("*.rj"))


def _z3_errors(text: str) -> list[str]:
    # drop check-sat: only parsing and sort checking are of interest here
    body = text.replace("(check-sat)", "")
    proc = subprocess.run(["z3", "-smt2", "-in"], input=body, capture_output=True, text=True, timeout=30)
    return [x for x in proc.stdout.splitlines() if x.startswith("(error")]


@needs_z3
@pytest.mark.parametrize("legacy", [False, True])
def test_every_fixture_script_is_accepted_by_z3(legacy):
    opts = EncodeOptions(legacy_names=legacy)
    n = 0
    for path in CORPUS:
        rp = resolve(parse_program(path.read_text()))
        texts = [encode_program(rp, opts)[0].render()]
        texts += [vc.script.render() for vc in generate_call_sites(rp, opts) if isinstance(vc, Vc)]
        texts += [vc.script.render() for vc in generate_call_sites(rp, EncodeOptions(legacy, skolemize=False))
                  if isinstance(vc, Vc)]
        for t in texts:
            assert _z3_errors(t) == [], path
            n += 1
    assert n > 20


@needs_z3
def test_skolemization_equivalence_on_news_board():
    rp = news()
    cfg = SolverConfig(timeout_ms=3000)
    for sk, q in zip(generate_vcs(rp, EncodeOptions(skolemize=True, timeout_ms=3000)),
                     generate_vcs(rp, EncodeOptions(skolemize=False, timeout_ms=3000))):
        assert "(assert (not (forall" in q.script.render()
        a = run_script(cfg, sk.script.render())
        b = run_script(cfg, q.script.render())
        assert isinstance(a, Unsat) == isinstance(b, Unsat), (sk.procedure, sk.call_index, a, b)
        if (sk.procedure, sk.call_index) == ("all_posts_by_user2", 1):
            assert isinstance(a, (Timeout, Unknown))
        else:
            assert isinstance(a, Unsat)


def test_script_model():
    s = SmtScript().declare_sort("A").declare_fun("f", ("A",), "A", "a comment").assert_("true").check_sat()
    assert s.render() == "(declare-sort A 0)\n; a comment\n(declare-fun f (A) A)\n(assert true)\n(check-sat)\n"
