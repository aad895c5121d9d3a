"""Parser and printer invariants.

The load-bearing property is the printer fixed point: for any source the
kernel accepts, print(parse(src)) must itself parse, produce a
structurally equal tree, and reprint byte-identically. Definition
splicing and prompt assembly both lean on this.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quintsmith.kernel import ast_equal, parse_expression, parse_module, print_expr, print_module
from quintsmith.kernel.diagnostics import PARSE, ParseError
from quintsmith.kernel import syntax as S

CORPUS = [
    "module m { }",
    "module m { var time: int }",
    "module m { pure val N = 3 + 4 * 2 }",
    "module m { type Addr = str\n type T = { a: int, b: Addr -> List[int] } }",
    "module m { type R = Ok({ n: int }) | Fail }",
    """module m {
      pure def f(x: int, y: int): int = if (x > y) x - y else y - x
    }""",
    """module m {
      pure def g(xs: List[int]): int = xs.foldl(0, (acc, x) => acc + x)
    }""",
    """module m {
      pure def h(m: str -> int, k: str): int = {
        val v = m.getOrElse(k, 0)
        val w = v * 2
        w % 7
      }
    }""",
    """module m {
      type E = A(int) | B
      pure def k(e: E): int = match e { | A(n) => n | B => 0 | _ => -1 }
    }""",
    """module m {
      var x: int
      action step = all {
        x' = x + 1,
      }
    }""",
    """module m {
      var x: int
      action choose = any {
        x' = 0,
        x' = 1,
      }
    }""",
    """module m {
      var x: int
      action pick = {
        nondet n = oneOf(1.to(5))
        x' = n
      }
    }""",
    """module m {
      pure def spread(r: { a: int, b: str }): { a: int, b: str } = { ...r, a: r.a + 1 }
    }""",
    """module m {
      pure def tup(): (int, str) = (1, "x")
      pure def use(): int = tup()._1
    }""",
    """module m {
      pure val M = Map("a" -> 1, "b" -> 2)
      pure val S = Set(1, 2, 3)
      pure val L = List(1, 2)
      pure val I = [4, 5][0]
    }""",
    """module m {
      pure def opt(o: Option[int]): int = match o { | Some(n) => n | None => 0 }
    }""",
    """module m {
      pure def cmp(a: int, b: int): bool = not (a == b) and a <= b or a >= b
    }""",
]


@pytest.mark.parametrize("src", CORPUS)
def test_print_parse_fixed_point(src):
    m1 = parse_module(src, "t.qnt")
    p1 = print_module(m1)
    m2 = parse_module(p1, "t.qnt")
    assert ast_equal(m1, m2)
    assert print_module(m2) == p1


def test_literal_pattern_is_a_parse_error():
    # Patterns admit only wildcards, binders, and constructors.
    with pytest.raises(ParseError) as exc:
        parse_expression("match x { | true => 1 | _ => 2 }")
    d = exc.value.diagnostic
    assert d.code == PARSE
    assert d.message == "mismatched input 'true' expecting {'_', LOW_ID, CAP_ID}"


def test_parse_error_render_has_header_excerpt_caret():
    src = "module m {\n  pure def f(s: S): int = match s { | true => 1 }\n}"
    with pytest.raises(ParseError) as exc:
        parse_module(src, "model.qnt")
    rendered = exc.value.diagnostic.render()
    lines = rendered.splitlines()
    assert lines[0] == ("model.qnt:2:39 - error: [QNT000] "
                        "mismatched input 'true' expecting {'_', LOW_ID, CAP_ID}")
    assert lines[1].endswith("match s { | true => 1 }")
    caret = lines[2]
    assert set(caret.strip()) == {"^"}
    assert caret.index("^") == lines[1].index("true")


def test_decl_spans_slice_to_reparseable_text():
    src = """module m {
      pure val A = 1
      pure def f(x: int): int = x + A
      var t: int
    }"""
    mod = parse_module(src, "t.qnt")
    for d in mod.decls:
        lo, hi = d.span
        snippet = src[lo:hi]
        assert snippet.strip()
        # A declaration's span reparses, inside a module shell, to an
        # equal declaration.
        sub = parse_module("module m {\n" + snippet + "\n}", "t.qnt")
        assert len(sub.decls) == 1
        assert ast_equal(sub.decls[0], d)


def test_unbalanced_module_is_parse_error():
    with pytest.raises(ParseError):
        parse_module("module m { pure val x = ", "t.qnt")


def test_expression_must_consume_all_input():
    with pytest.raises(ParseError):
        parse_expression("1 + 2 }")


# ---------------------------------------------------------------- hypothesis

_POS = S.Pos(0, 0, 1)
_NAMES = ["foo", "bar", "baz", "acc", "x0"]


def _leaf():
    return st.one_of(
        st.integers(min_value=0, max_value=999).map(lambda n: S.EInt(n, pos=_POS)),
        st.booleans().map(lambda b: S.EBool(b, pos=_POS)),
        st.sampled_from(["a", "b c", "d\"e", "f\\g", ""]).map(
            lambda s: S.EStr(s, pos=_POS)),
        st.sampled_from(_NAMES).map(lambda n: S.EName(n, pos=_POS)),
    )


def _compound(children):
    name = st.sampled_from(_NAMES)
    return st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*", "/", "%", "==", "!=", "<",
                                   "<=", ">", ">=", "and", "or"]),
                  children, children).map(
            lambda t: S.EBinop(t[0], t[1], t[2], pos=_POS)),
        st.tuples(st.sampled_from(["-", "not"]), children).map(
            lambda t: S.EUnop(t[0], t[1], pos=_POS)),
        st.tuples(children, children, children).map(
            lambda t: S.EIf(t[0], t[1], t[2], pos=_POS)),
        st.lists(children, min_size=0, max_size=3).map(
            lambda xs: S.EList(xs, pos=_POS)),
        st.lists(children, min_size=2, max_size=3).map(
            lambda xs: S.ETuple(xs, pos=_POS)),
        st.lists(st.tuples(st.sampled_from(["a", "b", "c"]), children),
                 min_size=1, max_size=3, unique_by=lambda p: p[0]).map(
            lambda fs: S.ERecord(list(fs), pos=_POS)),
        st.tuples(children, children).map(
            lambda t: S.ECall("put", [S.ECall("mk", [], pos=_POS), t[0], t[1]],
                              method_receiver=True, pos=_POS)),
        st.tuples(name, children, children).map(
            lambda t: S.ELet(t[0], t[1], t[2], pos=_POS)),
        st.tuples(name, children).map(
            lambda t: S.ELambda([t[0]], t[1], pos=_POS)),
        st.tuples(children, st.sampled_from(["a", "b"])).map(
            lambda t: S.EField(t[0], t[1], pos=_POS)),
        st.tuples(children, st.integers(min_value=1, max_value=3)).map(
            lambda t: S.ETupleGet(t[0], t[1], pos=_POS)),
        st.tuples(children, children).map(
            lambda t: S.EIndex(t[0], t[1], pos=_POS)),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_leaf(), _compound, max_leaves=25))
def test_printed_expression_reparses_equal(e):
    text = print_expr(e)
    back = parse_expression(text)
    assert ast_equal(e, back), f"{text!r} reparsed differently"
    assert print_expr(back) == text
