"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the verdict lines are
printed even under output capture) or directly with
``python tests/test_acceptance.py``.
"""

import itertools
import json
import random
import shutil
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import naive_match, z3_batch  # noqa: E402
from strategies import mutate, random_regex, random_type, sample_string, sample_value  # noqa: E402

from refcheck.cli import CheckConfig, cmd_emit_smt, main  # noqa: E402
from refcheck.lang import parse_program, resolve  # noqa: E402
from refcheck.lang.ast import Program, TypeDecl, erase_refinements  # noqa: E402
from refcheck.regex import matches, parse_regex, smt_string_literal, to_pattern, to_smt  # noqa: E402
from refcheck.report import Status, check_program  # noqa: E402
from refcheck.solver import SolverConfig  # noqa: E402
from refcheck.validator import validate, validate_named  # noqa: E402
from refcheck.values import from_json, parse_json_value  # noqa: E402

HERE = Path(__file__).parent
PROGRAMS = HERE / "fixtures" / "programs"
NEWS = PROGRAMS / "news_board.rj"
GOLDEN = HERE / "golden" / "news_board"
DEFAULT_TIMEOUT_S = 10.0
SCHEDULING_SLACK_S = 2.0

needs_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not on PATH")


_capture = {}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _capture["capsys"] = capsys
    yield
    _capture.clear()


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}"
    with _capture["capsys"].disabled():
        print("\n" + line)
    assert ok, line


_news_report = {}


def news_report():
    """Check the news board once with the default timeout; both news-board criteria share it."""
    if not _news_report:
        rp = resolve(parse_program(NEWS.read_text()))
        start = time.monotonic()
        report = check_program(rp, SolverConfig(timeout_ms=10000), jobs=4)
        _news_report["report"] = report
        _news_report["wall"] = time.monotonic() - start
    return _news_report["report"], _news_report["wall"]


def site(report, proc, index):
    return next(v for v in report.verdicts if (v.procedure, v.call_index) == (proc, index))


@needs_z3
def test_criterion_1_news_board_positive():
    report, _ = news_report()
    v = site(report, "all_posts_by_user", 1)
    ok = v.status is Status.WELL_TYPED and v.elapsed < 10.0
    verdict(1, ok, f"all_posts_by_user call 1 is {v.status.value} (solver said unsat) in {v.elapsed:.3f}s (limit 10s)")


@needs_z3
def test_criterion_2_news_board_negative():
    report, wall = news_report()
    v = site(report, "all_posts_by_user2", 1)
    allowed = v.status is Status.ILL_TYPED or (v.status is Status.NOT_VERIFIED and v.reason == "timeout")
    bounded = v.elapsed <= DEFAULT_TIMEOUT_S + SCHEDULING_SLACK_S
    verdict(2, allowed and bounded,
            f"all_posts_by_user2 call 1 is {v.status.value}({v.reason}) after {v.elapsed:.2f}s "
            f"(timeout {DEFAULT_TIMEOUT_S:.0f}s, whole run {wall:.2f}s)")


@needs_z3
def test_criterion_3_regex_solver_differential():
    rnd = random.Random(20240601)
    pairs = []
    while len(pairs) < 240:
        r = random_regex(rnd)
        s = sample_string(r, rnd)
        if rnd.random() < 0.5:
            s = mutate(s, rnd)
        pairs.append((r, s))
    queries = [f"(assert (str.in_re {smt_string_literal(s)} {to_smt(r)}))" for r, s in pairs]
    out = z3_batch(queries, timeout_ms=5000)
    decided = [(r, s, v) for (r, s), v in zip(pairs, out) if v in ("sat", "unsat")]
    unknown = len(pairs) - len(decided)
    disagree = [(to_pattern(r), s, v) for r, s, v in decided if (v == "sat") != matches(r, s)]
    positives = sum(v == "sat" for _, _, v in decided)
    ok = not disagree and unknown / len(pairs) < 0.05 and len(pairs) >= 200
    verdict(3, ok, f"{len(pairs)} pairs, {len(decided)} decided ({positives} members), "
                   f"{len(disagree)} disagreements, {unknown} unknown ({100 * unknown / len(pairs):.1f}%)"
                   + (f"; first: {disagree[0]}" if disagree else ""))


CATALOGUE = [
    "", "A", "-", "A-F", "[A-F]", r"\d", r"[A-F\d]", r"[A-F\d]{4,4}", "A*", "A+", "A?",
    "(A|F)*", "(AF)+", "A{2,3}", "A{2,}", "[09]{1,2}-?", "(A|F0|9-)*", r"\d\d", "A*F*",
    "(A*)*", "(A|)F", "(-|A){0,2}9", "[-A]{3}", r"(\d|A)(\d|F)?", "((A|F){2})*", "F{0}", "(A?){3}",
]


def test_criterion_4_brute_force_oracle():
    strings = ["".join(t) for n in range(5) for t in itertools.product("AF09-", repeat=n)]
    mismatches = []
    for p in CATALOGUE:
        r = parse_regex(p)
        mismatches += [(p, s) for s in strings if matches(r, s) != naive_match(r, s)]
    ok = len(CATALOGUE) >= 20 and len(strings) == 781 and not mismatches
    verdict(4, ok, f"{len(CATALOGUE)} regexes x {len(strings)} strings, {len(mismatches)} mismatches")


def test_criterion_5_dynamic_fixtures():
    schema = resolve(parse_program(NEWS.read_text()))
    values = HERE / "fixtures" / "values"
    cases = [
        ("user_valid.json", []),
        ("user_age18.json", [(".age", "PredicateViolation")]),
        ("user_bad_guid.json", [(".uid", "RegexViolation")]),
    ]
    results = []
    ok = True
    for name, want in cases:
        text = (values / name).read_bytes()
        start = time.perf_counter()
        errs = validate_named(parse_json_value(text), "user", schema)
        took_ms = (time.perf_counter() - start) * 1000
        got = [(e.dotted, e.kind) for e in errs]
        ok &= got == want and took_ms < 10.0
        results.append(f"{name} -> {got or 'accepted'} in {took_ms:.2f}ms")
    verdict(5, ok, "; ".join(results))


def test_criterion_6_refinement_weakening():
    schema_src = """
    type guid: string("[A-F\\\\d]{4}-[A-F\\\\d]{2}")
    type small: int(n >= 0 && n < 10)
    type rec: void { .id: guid .n?: small .tags*: string("[a-c]{1,3}") }
    """
    schema = resolve(parse_program(schema_src))
    p = schema.program
    erased = resolve(Program(tuple(TypeDecl(d.name, erase_refinements(d.type)) for d in p.types)))
    rnd = random.Random(7)
    accepted = violations = 0
    names = ("guid", "small", "rec")
    for _ in range(500):
        t = random_type(rnd, names)
        v = from_json(sample_value(t, schema, rnd))
        if not validate(v, t, schema):
            accepted += 1
            if validate(v, erase_refinements(t), erased):
                violations += 1
    ok = violations == 0 and accepted > 50
    verdict(6, ok, f"500 pairs, {accepted} accepted by the refined type, {violations} rejected by the erased type")


def test_criterion_7_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cmd_emit_smt(NEWS, a, CheckConfig())
    cmd_emit_smt(NEWS, b, CheckConfig())
    names = sorted(x.name for x in a.iterdir())
    same = names == sorted(x.name for x in b.iterdir()) and all((a / n).read_bytes() == (b / n).read_bytes() for n in names)
    golden = sorted(x.name for x in GOLDEN.iterdir()) == names and all(
        (a / n).read_bytes() == (GOLDEN / n).read_bytes() for n in names)
    verdict(7, same and golden, f"{len(names)} files, runs identical: {same}, match checked-in golden files: {golden}")


@needs_z3
def test_criterion_8_exit_code_contract(capsys):
    corpus = sorted(p for p in PROGRAMS.rglob("*.rj") if p != NEWS)
    seen = set()
    failures = []
    for path in corpus:
        header = path.read_text().splitlines()[0]
        want_exit = int(header.split("exit ")[1][0])
        want = header.split(";")[1].split() if ";" in header else []
        code = main(["check", str(path), "--format", "json", "--jobs", "4"])
        statuses = [c["status"] for c in json.loads(capsys.readouterr().out)["call_sites"]]
        seen.update(statuses)
        if code != want_exit or statuses != want:
            failures.append((path.name, code, statuses))
    classes = {"WellTyped", "IllTyped", "NotVerified", "DynamicOnly"}
    ok = len(corpus) >= 10 and seen == classes and not failures
    verdict(8, ok, f"{len(corpus)} programs, verdict classes seen: {sorted(seen)}, mismatches: {failures or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
