"""Differential evaluation: kernel evaluator vs the reference interpreter.

A seeded generator produces well-typed expression sources. Both
evaluators run each one; outcomes must agree exactly, either the same
canonical value or the same error code. Partial operations (get, nth,
head, tail, division) are generated on purpose so error parity is
exercised, not just the happy path.
"""

import random

import pytest
import reference_interp as ref

from quintsmith.kernel import Evaluator, RuntimeEvalError, canon, parse_expression, parse_module

SEED = 20250811
COUNT = 500
EMPTY = parse_module("module m { }", "m.qnt")


class Gen:
    """Random well-typed expression source, total by construction except
    for the deliberately partial operations."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.var_types: dict[str, str] = {}

    def pick(self, *options):
        return self.rng.choice(options)

    def int_(self, d):
        r = self.rng
        if d <= 0:
            return str(r.randint(-20, 20))
        return self.pick(
            lambda: str(r.randint(-20, 20)),
            lambda: f"({self.int_(d - 1)} + {self.int_(d - 1)})",
            lambda: f"({self.int_(d - 1)} - {self.int_(d - 1)})",
            lambda: f"({self.int_(d - 1)} * {self.int_(d - 1)})",
            lambda: f"({self.int_(d - 1)} / {self.int_(d - 1)})",
            lambda: f"({self.int_(d - 1)} % {self.int_(d - 1)})",
            lambda: f"(-{self.int_(d - 1)})",
            lambda: f"(if ({self.bool_(d - 1)}) {self.int_(d - 1)} else {self.int_(d - 1)})",
            lambda: f"{self.list_(d - 1)}.length()",
            lambda: f"{self.set_(d - 1)}.size()",
            lambda: f"{self.list_(d - 1)}.nth({r.randint(0, 3)})",
            lambda: f"{self.list_(d - 1)}.head()",
            lambda: f"{self.map_(d - 1)}.get({self.str_(0)})",
            lambda: f"{self.map_(d - 1)}.getOrElse({self.str_(0)}, {self.int_(d - 1)})",
            lambda: f"{self.set_(d - 1)}.fold({self.int_(d - 1)}, (acc, x) => acc + x)",
            lambda: f"{self.list_(d - 1)}.foldl(0, (acc, x) => acc * 2 + x)",
            lambda: f"(match {self.opt_(d - 1)} {{ | Some(x) => x | None => {self.int_(0)} }})",
            lambda: f"{self.rec_(d - 1)}.amount",
            lambda: f"{self.tup_(d - 1)}._1",
            lambda: f"{self.list_(d - 1)}[{r.randint(0, 3)}]",
            lambda: ("{ " + f"val tmp = {self.int_(d - 1)}\n  tmp + tmp" + " }"),
        )()

    def bool_(self, d):
        r = self.rng
        if d <= 0:
            return self.pick("true", "false")
        return self.pick(
            lambda: self.pick("true", "false"),
            lambda: f"({self.bool_(d - 1)} and {self.bool_(d - 1)})",
            lambda: f"({self.bool_(d - 1)} or {self.bool_(d - 1)})",
            lambda: f"(not {self.bool_(d - 1)})",
            lambda: f"({self.int_(d - 1)} {self.pick('<', '<=', '>', '>=', '==', '!=')} {self.int_(d - 1)})",
            lambda: f"({self.str_(d - 1)} == {self.str_(d - 1)})",
            lambda: f"({self.set_(d - 1)} == {self.set_(d - 1)})",
            lambda: f"({self.map_(d - 1)} != {self.map_(d - 1)})",
            lambda: f"{self.set_(d - 1)}.contains({self.int_(d - 1)})",
            lambda: f"{self.set_(d - 1)}.exists(x => x > {self.int_(0)})",
            lambda: f"{self.set_(d - 1)}.forall(x => x < {self.int_(0)})",
        )()

    def str_(self, d):
        base = self.pick('"a"', '"b"', '"k1"', '"k2"', '""')
        if d <= 0:
            return base
        return self.pick(
            lambda: base,
            lambda: f"(if ({self.bool_(d - 1)}) {self.str_(0)} else {self.str_(0)})",
        )()

    def list_(self, d):
        r = self.rng
        if d <= 0:
            items = ", ".join(self.int_(0) for _ in range(r.randint(0, 3)))
            return f"[{items}]"
        return self.pick(
            lambda: "[" + ", ".join(self.int_(d - 1) for _ in range(r.randint(0, 3))) + "]",
            lambda: f"{self.list_(d - 1)}.append({self.int_(d - 1)})",
            lambda: f"{self.list_(d - 1)}.concat({self.list_(d - 1)})",
            lambda: f"{self.list_(d - 1)}.tail()",
            lambda: f"{self.list_(d - 1)}.select(x => x % 2 == 0)",
            lambda: f"{self.list_(d - 1)}.map(x => x - 1)",
        )()

    def set_(self, d):
        r = self.rng
        if d <= 0:
            items = ", ".join(self.int_(0) for _ in range(r.randint(0, 3)))
            return f"Set({items})"
        lo = r.randint(-3, 3)
        return self.pick(
            lambda: "Set(" + ", ".join(self.int_(d - 1) for _ in range(r.randint(0, 3))) + ")",
            lambda: f"({lo}).to({lo + r.randint(0, 5)})",
            lambda: f"{self.set_(d - 1)}.union({self.set_(d - 1)})",
            lambda: f"{self.set_(d - 1)}.filter(x => x > {self.int_(0)})",
            lambda: f"{self.set_(d - 1)}.map(x => x % 5)",
            lambda: f"{self.list_(d - 1)}.toSet()",
            lambda: f"{self.list_(d - 1)}.indices()",
        )()

    def map_(self, d):
        r = self.rng
        keys = ['"a"', '"b"', '"k1"', '"k2"']
        if d <= 0:
            pairs = ", ".join(f"{k} -> {self.int_(0)}"
                              for k in r.sample(keys, r.randint(0, 3)))
            return f"Map({pairs})"
        return self.pick(
            lambda: "Map(" + ", ".join(
                f"{k} -> {self.int_(d - 1)}"
                for k in r.sample(keys, r.randint(0, 3))) + ")",
            lambda: f"{self.map_(d - 1)}.put({self.str_(0)}, {self.int_(d - 1)})",
            lambda: f"{self.map_(d - 1)}.mapRemove({self.str_(0)})",
        )()

    def rec_(self, d):
        return f"{{ amount: {self.int_(max(d - 1, 0))}, tag: {self.str_(0)} }}"

    def tup_(self, d):
        return f"({self.int_(max(d - 1, 0))}, {self.str_(0)})"

    def opt_(self, d):
        if self.rng.random() < 0.5:
            return "None"
        return f"Some({self.int_(max(d - 1, 0))})"

    def any_(self, d):
        return self.pick(self.int_, self.bool_, self.str_, self.list_,
                         self.set_, self.map_, self.rec_, self.tup_)(d)


def outcomes(text):
    expr = parse_expression(text)
    try:
        got = canon(Evaluator(EMPTY).eval_expr(expr, text))
        kernel = ("value", got)
    except RuntimeEvalError as e:
        kernel = ("error", e.diagnostic.code)
    interp = ref.RefInterpreter(EMPTY)
    try:
        oracle = ("value", ref.canon(interp.eval(expr, {})))
    except ref.RefError as e:
        oracle = ("error", e.code)
    return kernel, oracle


def test_differential_500_expressions():
    rng = random.Random(SEED)
    gen = Gen(rng)
    mismatches = []
    n_values = n_errors = 0
    for i in range(COUNT):
        text = gen.any_(rng.randint(1, 4))
        kernel, oracle = outcomes(text)
        if kernel != oracle:
            mismatches.append((i, text, kernel, oracle))
        elif kernel[0] == "value":
            n_values += 1
        else:
            n_errors += 1
    assert not mismatches, f"{len(mismatches)} divergence(s); first: {mismatches[0]}"
    # The corpus must actually exercise both outcome classes.
    assert n_values >= 300
    assert n_errors >= 10


def test_differential_on_module_calls():
    src = """module m {
      pure val RATE = 3
      pure def clamp(x: int, lo: int, hi: int): int =
        if (x < lo) lo else if (x > hi) hi else x
      pure def settle(bal: str -> int, who: str, amt: int): (str -> int, int) = {
        val cur = bal.getOrElse(who, 0)
        val next = clamp(cur - amt * RATE, 0, 1000)
        (bal.put(who, next), next)
      }
    }"""
    mod = parse_module(src, "m.qnt")
    rng = random.Random(SEED + 1)
    e = Evaluator(mod)
    for _ in range(100):
        who = rng.choice(['"a"', '"b"', '"c"'])
        amt = rng.randint(-5, 5)
        text = f'settle(Map("a" -> {rng.randint(0, 30)}), {who}, {amt})'
        expr = parse_expression(text)
        mine = canon(e.eval_expr(expr, text))
        theirs = ref.canon(ref.RefInterpreter(mod).eval(expr, {}))
        assert mine == theirs, text
