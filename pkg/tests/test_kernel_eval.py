"""Evaluator semantics against hand-computed expectations.

Division and modulo expectations follow the documented truncation rule
(quotient rounds toward zero, remainder takes the dividend's sign) and
were worked out by hand before the evaluator existed; fold-order and
dedup expectations come from the canonical-order rule.
"""

import pytest

from quintsmith.kernel import (
    Evaluator, RuntimeEvalError, VBool, VInt, VList, VRecord, VStr, VVariant,
    eval_pure, mk_map, mk_set, parse_expression, parse_module, render_value,
    value_from_jsonable, value_to_jsonable, values_equal,
)
from quintsmith.kernel.diagnostics import (
    DIV_BY_ZERO, INDEX_RANGE, MISSING_KEY, NO_MATCH_ARM, RUNTIME_GENERIC,
)

EMPTY = parse_module("module m { }", "m.qnt")


def ev(text):
    return Evaluator(EMPTY).eval_expr(parse_expression(text), text)


def show(text):
    return render_value(ev(text))


@pytest.mark.parametrize("expr,expected", [
    # Truncation toward zero; remainder keeps the dividend's sign.
    ("7 / 2", 3), ("-7 / 2", -3), ("7 / -2", -3), ("-7 / -2", 3),
    ("7 % 2", 1), ("-7 % 2", -1), ("7 % -2", 1), ("-7 % -2", -1),
    ("1 - 2 - 3", -4), ("2 * 3 + 4", 10), ("2 + 3 * 4", 14),
])
def test_integer_arithmetic(expr, expected):
    assert ev(expr) == VInt(expected)


def test_division_by_zero():
    with pytest.raises(RuntimeEvalError) as exc:
        ev("1 / 0")
    assert exc.value.diagnostic.code == DIV_BY_ZERO
    assert exc.value.diagnostic.message == "Division by zero"
    with pytest.raises(RuntimeEvalError):
        ev("1 % 0")


def test_short_circuit_skips_crashing_operand():
    assert ev("false and 1 / 0 == 0") == VBool(False)
    assert ev("true or 1 / 0 == 0") == VBool(True)


def test_equality_ignores_construction_order():
    assert ev("Set(1, 2, 3) == Set(3, 1, 2)") == VBool(True)
    assert ev('Map("a" -> 1, "b" -> 2) == Map("b" -> 2, "a" -> 1)') == VBool(True)
    assert ev("[1, 2] == [2, 1]") == VBool(False)


def test_set_dedup_and_map_last_write_wins():
    assert ev("Set(1, 2, 1).size()") == VInt(2)
    assert ev('Map("a" -> 1, "a" -> 2).get("a")') == VInt(2)
    assert ev('Map("a" -> 1).put("a", 9).get("a")') == VInt(9)


def test_fold_iterates_sets_in_canonical_order():
    assert show("Set(3, 1, 2).fold([], (acc, x) => acc.append(x))") == "[1, 2, 3]"
    assert show('Set("b", "a").fold([], (acc, x) => acc.append(x))') == '["a", "b"]'


def test_get_or_else_on_missing_key():
    assert show("Map().getOrElse(\"s\", { amount: 0 })") == "{ amount: 0 }"


def test_get_missing_key_is_qnt507():
    with pytest.raises(RuntimeEvalError) as exc:
        ev('Map("a" -> 1).get("b")')
    d = exc.value.diagnostic
    assert d.code == MISSING_KEY
    assert d.message == "Called 'get' with a non-existing key"


@pytest.mark.parametrize("expr,message", [
    ("[1, 2].nth(7)", "Out of bounds, nth(7)"),
    ("[1, 2][5]", "Out of bounds, nth(5)"),
    ("List().head()", "Called 'head' on an empty list"),
    ("List().tail()", "Called 'tail' on an empty list"),
])
def test_list_range_errors(expr, message):
    with pytest.raises(RuntimeEvalError) as exc:
        ev(expr)
    assert exc.value.diagnostic.code == INDEX_RANGE
    assert exc.value.diagnostic.message == message


def test_no_match_arm_is_runtime_error():
    src = """module m {
      type E = A(int) | B
      pure def f(e: E): int = match e { | A(n) => n | B => 0 }
    }"""
    mod = parse_module(src, "m.qnt")
    e = Evaluator(mod)
    assert e.call("f", [VVariant("B")]) == VInt(0)
    text = "match B { | A(n) => n }"
    with pytest.raises(RuntimeEvalError) as exc:
        e.eval_expr(parse_expression(text), text)
    assert exc.value.diagnostic.code == NO_MATCH_ARM


def test_builtin_catalog():
    assert show("1.to(4)") == "Set(1, 2, 3, 4)"
    assert show("Set(1, 2).union(Set(2, 3))") == "Set(1, 2, 3)"
    assert ev("Set(1, 2, 3).contains(2)") == VBool(True)
    assert ev("Set(1, 2).exists(x => x > 1)") == VBool(True)
    assert ev("Set(1, 2).forall(x => x > 1)") == VBool(False)
    assert show("Set(1, 2, 3).filter(x => x % 2 == 1)") == "Set(1, 3)"
    assert show("Set(1, 2).map(x => x * 10)") == "Set(10, 20)"
    assert show("[1, 2].map(x => x * 10)") == "[10, 20]"
    assert show("[1, 2].append(3)") == "[1, 2, 3]"
    assert show("[1].concat([2, 3])") == "[1, 2, 3]"
    assert ev("[4, 5, 6].length()") == VInt(3)
    assert ev("[4, 5, 6].nth(1)") == VInt(5)
    assert ev("[4, 5].head()") == VInt(4)
    assert show("[4, 5, 6].tail()") == "[5, 6]"
    assert show("[7, 8].indices()") == "Set(0, 1)"
    assert ev("[1, 2, 3].foldl(0, (a, x) => a + x)") == VInt(6)
    assert show("[1, 2, 3, 4].select(x => x % 2 == 0)") == "[2, 4]"
    assert show("[1, 2, 1].toSet()") == "Set(1, 2)"
    assert show('Map("a" -> 1).keys()') == 'Set("a")'
    assert show('Map("a" -> 1, "b" -> 2).mapRemove("a")') == 'Map("b" -> 2)'


def test_records_tuples_and_spread():
    assert show("{ a: 1, b: \"x\" }.b") == '"x"'
    assert show("(1, \"y\")._2") == '"y"'
    assert show("{ ...{ a: 1, b: 2 }, b: 9 }") == "{ a: 1, b: 9 }"


def test_module_vals_and_defs():
    src = """module m {
      pure val BASE = 10
      pure def scaled(x: int): int = x * BASE
      pure def twice(x: int): int = scaled(scaled(x))
    }"""
    mod = parse_module(src, "m.qnt")
    assert eval_pure(mod, "twice", [VInt(2)]) == VInt(200)


def test_unbounded_recursion_hits_depth_guard():
    src = "module m { pure def loop(x: int): int = loop(x + 1) }"
    mod = parse_module(src, "m.qnt")
    with pytest.raises(RuntimeEvalError) as exc:
        eval_pure(mod, "loop", [VInt(0)])
    assert exc.value.diagnostic.code == RUNTIME_GENERIC


def test_huge_range_hits_budget_guard():
    with pytest.raises(RuntimeEvalError) as exc:
        ev("1.to(100000000)")
    assert exc.value.diagnostic.code == RUNTIME_GENERIC


def test_runtime_render_matches_static_shape():
    src = """module m {
      type S = { balances: str -> { amount: int } }
      pure def f(s: S, who: str): int =
        s.balances.get(who).amount
    }"""
    mod = parse_module(src, "m.qnt")
    e = Evaluator(mod)
    state = VRecord({"balances": mk_map([])})
    with pytest.raises(RuntimeEvalError) as exc:
        e.call("f", [state, VStr("nobody")])
    rendered = exc.value.diagnostic.render_runtime()
    lines = rendered.splitlines()
    assert lines[0] == ("runtime error: error: [QNT507] "
                        "Called 'get' with a non-existing key")
    assert lines[1] == "s.balances.get(who).amount"
    assert lines[2].startswith("^")
    assert set(lines[2]) == {"^"}


def test_render_value_round_trips_through_parser():
    texts = [
        "{ config: { total_supply: 100 }, balances: Map(\"a\" -> { amount: 3 }) }",
        "Ok({ attributes: [(1, \"k\")] })",
        "Set(Map(), Map(\"x\" -> 1))",
        "[-3, 0, 7]",
    ]
    for t in texts:
        v = ev(t)
        v2 = ev(render_value(v))
        assert values_equal(v, v2)


def test_json_round_trip_preserves_values():
    vals = [
        ev("{ a: Set(1, 2), b: Map(\"k\" -> [true, false]), c: (1, \"s\") }"),
        ev("Some({ amount: 5 })"),
        ev("None"),
        ev("Err(\"boom\")"),
        VInt(-12), VBool(True), VStr("hi"), VList([]), mk_set([]), mk_map([]),
    ]
    for v in vals:
        j = value_to_jsonable(v)
        assert values_equal(value_from_jsonable(j), v)
