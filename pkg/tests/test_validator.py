import json
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from refcheck.errors import JsonSyntaxError, NestingTooDeep, UnknownTypeName
from refcheck.lang import parse_program, resolve
from refcheck.lang.ast import BasicKind, Choice, Program, TypeDecl, erase_refinements
from refcheck.validator import validate, validate_named
from refcheck.values import ValueTree, from_json, parse_json_value

from strategies import sample_value, type_exprs

HERE = Path(__file__).parent
NEWS = resolve(parse_program((HERE / "fixtures" / "programs" / "news_board.rj").read_text()))
GOOD = "21EC2020-3AEA-4069-A2DD-08002B30309D"


def errs(text, type_name="user", **kw):
    return [(e.dotted, e.kind) for e in validate_named(parse_json_value(text), type_name, NEWS, **kw)]


# ---------------------------------------------------------------------------
# JSON mapping


def test_json_object_mapping():
    v = parse_json_value(json.dumps({"uid": GOOD, "name": "Ada", "age": 30}))
    assert v.root is None and v.kind is BasicKind.VOID
    assert list(v.children) == ["uid", "name", "age"]
    assert v.children["age"] == (ValueTree(30),)


def test_json_scalar_and_root_key():
    assert parse_json_value('"hello"') == ValueTree("hello")
    v = parse_json_value('{"$":5,"unit":"m"}')
    assert v.root == 5 and v.kind is BasicKind.INT
    assert v.children == {"unit": (ValueTree("m"),)}


def test_json_arrays_numbers_null():
    v = parse_json_value('{"post": [1, 2.5, null], "none": []}')
    assert [c.root for c in v.children["post"]] == [1, 2.5, None]
    assert [c.kind for c in v.children["post"]] == [BasicKind.INT, BasicKind.DOUBLE, BasicKind.VOID]
    assert "none" not in v.children
    assert parse_json_value("1e2").kind is BasicKind.DOUBLE


def test_to_json_round_trip():
    doc = {"$": 3, "a": [{"b": "x"}, {"b": "y"}], "c": True}
    assert parse_json_value(json.dumps(doc)).to_json() == doc


@pytest.mark.parametrize("text", ["{", '{"a":1,"a":2}', "NaN", '{"a": [[1]]}', "[1, 2]", '{"$": {"x": 1}}',
                                  "9223372036854775808", b"\xff\xfe"])
def test_json_errors(text):
    with pytest.raises(JsonSyntaxError):
        parse_json_value(text)


def test_nesting_limit():
    deep = '{"a":' * 70 + "1" + "}" * 70
    with pytest.raises(NestingTooDeep):
        parse_json_value(deep)
    parse_json_value(deep, max_depth=80)
    with pytest.raises(NestingTooDeep):
        parse_json_value('{"a":' * 100000 + "1" + "}" * 100000)


def test_empty_child_list_rejected():
    with pytest.raises(ValueError):
        ValueTree(None, {"a": ()})


# ---------------------------------------------------------------------------
# validation


def test_valid_user():
    assert errs(json.dumps({"uid": GOOD, "name": "Ada", "age": 30})) == []


def test_age_18_is_rejected():
    assert errs(json.dumps({"uid": GOOD, "name": "Ada", "age": 18})) == [(".age", "PredicateViolation")]
    assert errs(json.dumps({"uid": GOOD, "name": "Ada", "age": 19})) == []


def test_not_a_guid_and_missing_name():
    assert errs('{"uid":"not-a-guid", "age":30}') == [(".uid", "RegexViolation"), (".name", "MissingField")]


def test_kind_mismatch_unexpected_and_open_world():
    text = json.dumps({"uid": GOOD, "name": 7, "age": "thirty", "x": 1})
    assert errs(text) == [(".name", "BasicKindMismatch"), (".age", "BasicKindMismatch"), (".x", "UnexpectedField")]
    assert errs(text, open_world=True) == [(".name", "BasicKindMismatch"), (".age", "BasicKindMismatch")]


def test_cardinality_and_paths():
    text = json.dumps({"post": [{"pid": GOOD, "owner": GOOD, "content": "a"},
                                {"pid": "bad", "owner": GOOD, "content": "b"}]})
    (e,) = validate_named(parse_json_value(text), "posts", NEWS)
    assert (e.dotted, e.pointer, e.kind) == (".post[1].pid", "/post/1/pid/0", "RegexViolation")
    assert e.to_json()["path"] == "/post/1/pid/0"
    assert errs(json.dumps({"uid": [GOOD, GOOD], "name": "A", "age": 20})) == [(".uid", "CardinalityViolation")]
    assert errs("{}", "posts") == []


def test_choice_reports_all_branches():
    rp = resolve(parse_program('type c: int(n > 0) | string("[A-F]+")'))
    assert validate_named(parse_json_value("3"), "c", rp) == []
    assert validate_named(parse_json_value('"AF"'), "c", rp) == []
    (e,) = validate_named(parse_json_value("-1"), "c", rp)
    assert e.kind == "NoChoiceBranch"
    assert [[x.kind for x in b] for b in e.branches] == [["PredicateViolation"], ["BasicKindMismatch"]]
    assert len(e.to_json()["branches"]) == 2


def test_double_accepts_int_and_real_predicates():
    rp = resolve(parse_program("type d: double(x > 0)"))
    assert validate_named(parse_json_value("1"), "d", rp) == []
    assert validate_named(parse_json_value("0.5"), "d", rp) == []
    assert [e.kind for e in validate_named(parse_json_value("-0.5"), "d", rp)] == ["PredicateViolation"]


def test_basic_and_unknown_type_names():
    assert validate_named(parse_json_value('"x"'), "string", NEWS) == []
    with pytest.raises(UnknownTypeName):
        validate_named(parse_json_value('"x"'), "nope", NEWS)


def test_error_limit():
    rp = resolve(parse_program("type t: void { .a*: int(n > 0) }"))
    v = from_json({"a": [-1] * 400})
    assert len(validate_named(v, "t", rp)) == 256
    assert len(validate_named(v, "t", rp, limit=10)) == 10


# ---------------------------------------------------------------------------
# properties

SCHEMA = resolve(parse_program("""
type guid: string("[A-F\\\\d]{8}-[A-F\\\\d]{4}")
type small: int(n >= 0 && n < 10)
type rec: void { .id: guid .n?: small .tags*: string("[a-c]{1,3}") }
"""))


@given(st.data())
@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_choice_law(data):
    a = data.draw(type_exprs(("guid", "small", "rec"), allow_choice=False))
    b = data.draw(type_exprs(("guid", "small", "rec"), allow_choice=False))
    rnd = random.Random(data.draw(st.integers(0, 2**32)))
    doc = sample_value(rnd.choice([a, b]), SCHEMA, rnd)
    v = from_json(doc)
    either = not validate(v, a, SCHEMA) or not validate(v, b, SCHEMA)
    assert (not validate(v, Choice((a, b)), SCHEMA)) == either


@given(st.data())
@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_refinement_weakening_property(data):
    t = data.draw(type_exprs(("guid", "small", "rec")))
    rnd = random.Random(data.draw(st.integers(0, 2**32)))
    v = from_json(sample_value(t, SCHEMA, rnd))
    if not validate(v, t, SCHEMA):
        assert validate(v, erase_refinements(t), ERASED) == []


def erase_schema(rp):
    """The same declarations with every refinement dropped, named ones included."""
    p = rp.program
    return resolve(Program(tuple(TypeDecl(d.name, erase_refinements(d.type)) for d in p.types), p.operations))


ERASED = erase_schema(SCHEMA)
