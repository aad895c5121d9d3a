"""Evaluator for pure definitions.

Semantics notes shared with the documented language rules: integer
division truncates toward zero and the remainder follows the dividend;
set iteration (fold, exists, forall) runs in canonical value order;
map and set equality ignore construction order. Actions are not
evaluated here; the trace simulator drives them with explicit picks.

Budget guards keep hostile or accidental blowups (unbounded recursion,
giant ranges) from hanging the synthesis loop; they surface as QNT500
runtime diagnostics.
"""

from __future__ import annotations

from . import syntax as S
from .parser import parse_expression
from .diagnostics import (
    DIV_BY_ZERO, INDEX_RANGE, MISSING_KEY, NAME_ERROR, NO_MATCH_ARM,
    RUNTIME_GENERIC, Diagnostic, RuntimeEvalError,
)
from .values import (
    Value, VBool, VInt, VLambda, VList, VMap, VRecord, VSet, VStr, VTuple,
    VVariant, canon, map_entries, mk_map, mk_set, set_members,
)

_BUILTIN_CTORS = {"Some": True, "None": False, "Ok": True, "Err": True}


class Evaluator:
    def __init__(self, module: S.Module, libs: list[S.Module] | None = None,
                 max_steps: int = 5_000_000, max_depth: int = 200,
                 max_range: int = 1_000_000):
        self.max_steps = max_steps
        self.max_depth = max_depth
        self.max_range = max_range
        self.steps = 0
        self.depth = 0
        self.frames: list[tuple[list[str], str]] = []
        self.ctors: dict[str, bool] = dict(_BUILTIN_CTORS)
        self.defs: dict[str, tuple[S.DDef, list[str], str]] = {}
        self.globals: dict[str, Value] = {}

        mods = (libs or []) + [module]
        for m in mods:
            for d in m.decls:
                if isinstance(d, S.DSumType):
                    for cname, payload in d.ctors:
                        self.ctors[cname] = payload is not None
        for m in mods:
            lines = m.source.splitlines()
            for d in m.decls:
                if isinstance(d, S.DDef) and d.kind == "pure":
                    self.defs[d.name] = (d, lines, m.file)
        for m in mods:
            lines = m.source.splitlines()
            for d in m.decls:
                if isinstance(d, S.DVal):
                    self.frames.append((lines, m.file))
                    try:
                        self.globals[d.name] = self.eval(d.value, {})
                    finally:
                        self.frames.pop()

    # ------------------------------------------------------------- errors

    def err(self, code: str, message: str, pos: S.Pos) -> RuntimeEvalError:
        lines, file = self.frames[-1] if self.frames else ([], "<model>")
        src = lines[pos.line - 1] if 0 < pos.line <= len(lines) else ""
        return RuntimeEvalError(Diagnostic(code, message, file, pos.line,
                                           pos.col, pos.width, src))

    # -------------------------------------------------------------- entry

    def call(self, name: str, args: list[Value]) -> Value:
        entry = self.defs.get(name)
        if entry is None:
            raise RuntimeEvalError(Diagnostic(NAME_ERROR, f"no pure definition named {name}"))
        d, lines, file = entry
        if len(args) != len(d.params):
            raise RuntimeEvalError(Diagnostic(
                RUNTIME_GENERIC,
                f"{name} takes {len(d.params)} argument(s), got {len(args)}"))
        self.depth += 1
        if self.depth > self.max_depth:
            self.depth -= 1
            raise self.err(RUNTIME_GENERIC, "call depth exceeded", d.pos)
        self.frames.append((lines, file))
        try:
            env = {p: a for (p, _), a in zip(d.params, args)}
            return self.eval(d.body, env)
        finally:
            self.frames.pop()
            self.depth -= 1

    def eval_expr(self, e: S.Expr | str, source: str = "", file: str = "<expr>") -> Value:
        if isinstance(e, str):
            source = e
            e = parse_expression(e, file=file)
        self.frames.append((source.splitlines(), file))
        try:
            return self.eval(e, {})
        finally:
            self.frames.pop()

    # ---------------------------------------------------------- evaluator

    def eval(self, e: S.Expr, env: dict[str, Value]) -> Value:
        self.steps += 1
        if self.steps > self.max_steps:
            raise self.err(RUNTIME_GENERIC, "evaluation budget exceeded", e.pos)
        if isinstance(e, S.EInt):
            return VInt(e.value)
        if isinstance(e, S.EBool):
            return VBool(e.value)
        if isinstance(e, S.EStr):
            return VStr(e.value)
        if isinstance(e, S.EName):
            if e.name in env:
                return env[e.name]
            if e.name in self.globals:
                return self.globals[e.name]
            if e.name in self.ctors:
                if self.ctors[e.name]:
                    raise self.err(RUNTIME_GENERIC,
                                   f"constructor {e.name} needs a payload", e.pos)
                return VVariant(e.name)
            raise self.err(NAME_ERROR, f"Failed to resolve name {e.name}", e.pos)
        if isinstance(e, S.ELet):
            value = self.eval(e.value, env)
            return self.eval(e.body, {**env, e.name: value})
        if isinstance(e, S.EIf):
            cond = self.eval(e.cond, env)
            branch = e.then if isinstance(cond, VBool) and cond.b else e.otherwise
            return self.eval(branch, env)
        if isinstance(e, S.ELambda):
            return VLambda(e.params, e.body, dict(env))
        if isinstance(e, S.ETuple):
            return VTuple([self.eval(i, env) for i in e.items])
        if isinstance(e, S.EList):
            return VList([self.eval(i, env) for i in e.items])
        if isinstance(e, S.ESet):
            return mk_set([self.eval(i, env) for i in e.items])
        if isinstance(e, S.EMap):
            return mk_map([(self.eval(k, env), self.eval(v, env)) for k, v in e.pairs])
        if isinstance(e, S.ERecord):
            return VRecord({n: self.eval(v, env) for n, v in e.fields})
        if isinstance(e, S.ERecordUpdate):
            base = self.eval(e.base, env)
            if not isinstance(base, VRecord):
                raise self.err(RUNTIME_GENERIC, "record update on non-record", e.base.pos)
            fields = dict(base.fields)
            for n, v in e.fields:
                if n not in fields:
                    raise self.err(RUNTIME_GENERIC, f"unknown record field {n}", v.pos)
                fields[n] = self.eval(v, env)
            return VRecord(fields)
        if isinstance(e, S.EField):
            base = self.eval(e.base, env)
            if not isinstance(base, VRecord) or e.name not in base.fields:
                raise self.err(RUNTIME_GENERIC, f"no record field {e.name}", e.pos)
            return base.fields[e.name]
        if isinstance(e, S.ETupleGet):
            base = self.eval(e.base, env)
            if not isinstance(base, VTuple) or e.index > len(base.items):
                raise self.err(RUNTIME_GENERIC, f"no tuple component _{e.index}", e.pos)
            return base.items[e.index - 1]
        if isinstance(e, S.EIndex):
            base = self.eval(e.base, env)
            idx = self.eval(e.index, env)
            if not isinstance(base, VList) or not isinstance(idx, VInt):
                raise self.err(RUNTIME_GENERIC, "indexing requires a list and an int", e.pos)
            if not 0 <= idx.n < len(base.items):
                raise self.err(INDEX_RANGE, f"Out of bounds, nth({idx.n})", e.pos)
            return base.items[idx.n]
        if isinstance(e, S.EUnop):
            v = self.eval(e.operand, env)
            if e.op == "not":
                return VBool(not (isinstance(v, VBool) and v.b))
            if not isinstance(v, VInt):
                raise self.err(RUNTIME_GENERIC, "negation of a non-integer", e.pos)
            return VInt(-v.n)
        if isinstance(e, S.EBinop):
            return self._binop(e, env)
        if isinstance(e, S.EMatch):
            return self._match(e, env)
        if isinstance(e, S.ECall):
            return self._call(e, env)
        if isinstance(e, (S.EPrime, S.EAll, S.EAny, S.ENondet)):
            raise self.err(RUNTIME_GENERIC,
                           "action operators cannot be evaluated as pure code", e.pos)
        raise self.err(RUNTIME_GENERIC, f"cannot evaluate {type(e).__name__}", e.pos)

    def _binop(self, e: S.EBinop, env: dict[str, Value]) -> Value:
        op = e.op
        if op == "and":
            left = self.eval(e.left, env)
            if not (isinstance(left, VBool) and left.b):
                return VBool(False)
            right = self.eval(e.right, env)
            return VBool(isinstance(right, VBool) and right.b)
        if op == "or":
            left = self.eval(e.left, env)
            if isinstance(left, VBool) and left.b:
                return VBool(True)
            right = self.eval(e.right, env)
            return VBool(isinstance(right, VBool) and right.b)
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if op == "==":
            return VBool(canon(a) == canon(b))
        if op == "!=":
            return VBool(canon(a) != canon(b))
        if op in ("<", "<=", ">", ">=", "+", "-", "*", "/", "%"):
            if not isinstance(a, VInt) or not isinstance(b, VInt):
                raise self.err(RUNTIME_GENERIC, f"{op} requires integers", e.pos)
            x, y = a.n, b.n
            if op == "<":
                return VBool(x < y)
            if op == "<=":
                return VBool(x <= y)
            if op == ">":
                return VBool(x > y)
            if op == ">=":
                return VBool(x >= y)
            if op == "+":
                return VInt(x + y)
            if op == "-":
                return VInt(x - y)
            if op == "*":
                return VInt(x * y)
            if y == 0:
                raise self.err(DIV_BY_ZERO, "Division by zero", e.pos)
            q = abs(x) // abs(y)
            if (x < 0) != (y < 0):
                q = -q
            return VInt(q) if op == "/" else VInt(x - y * q)
        raise self.err(RUNTIME_GENERIC, f"unknown operator {op}", e.pos)

    def _match(self, e: S.EMatch, env: dict[str, Value]) -> Value:
        subject = self.eval(e.scrutinee, env)
        for pat, body in e.arms:
            bound: dict[str, Value] = {}
            if self._match_pat(pat, subject, bound):
                return self.eval(body, {**env, **bound})
        raise self.err(NO_MATCH_ARM, "no match arm applies", e.pos)

    def _match_pat(self, pat: S.Pattern, value: Value, bound: dict[str, Value]) -> bool:
        if isinstance(pat, S.PWild):
            return True
        if isinstance(pat, S.PBind):
            bound[pat.name] = value
            return True
        if isinstance(pat, S.PCtor):
            if not isinstance(value, VVariant) or value.name != pat.name:
                return False
            if not pat.args:
                return True
            return self._match_pat(pat.args[0], value.payload, bound)
        return False

    def _apply(self, fn: Value, args: list[Value], pos: S.Pos) -> Value:
        if not isinstance(fn, VLambda):
            raise self.err(RUNTIME_GENERIC, "not a function", pos)
        env = dict(fn.env)
        for p, a in zip(fn.params, args):
            env[p] = a
        return self.eval(fn.body, env)

    def _call(self, e: S.ECall, env: dict[str, Value]) -> Value:
        name = e.name
        if name == "oneOf":
            raise self.err(RUNTIME_GENERIC,
                           "oneOf cannot be evaluated as pure code", e.pos)
        if name in self.ctors and name not in self.defs:
            if len(e.args) != 1:
                raise self.err(RUNTIME_GENERIC,
                               f"constructor {name} takes exactly one argument", e.pos)
            return VVariant(name, self.eval(e.args[0], env))
        if name in self.defs:
            return self.call(name, [self.eval(a, env) for a in e.args])
        if name in env or name in self.globals:
            fn = env.get(name, self.globals.get(name))
            return self._apply(fn, [self.eval(a, env) for a in e.args], e.pos)
        args = [self.eval(a, env) for a in e.args]
        return self._builtin(name, args, e)

    def _builtin(self, name: str, a: list[Value], e: S.ECall) -> Value:
        pos = e.pos

        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise self.err(RUNTIME_GENERIC, f"{name}: {msg}", pos)

        if name == "to":
            need(len(a) == 2 and all(isinstance(x, VInt) for x in a), "expects two integers")
            lo, hi = a[0].n, a[1].n
            if hi - lo + 1 > self.max_range:
                raise self.err(RUNTIME_GENERIC, "range too large", pos)
            return mk_set([VInt(i) for i in range(lo, hi + 1)])
        if name == "get":
            need(len(a) == 2 and isinstance(a[0], VMap), "expects a map and a key")
            entry = a[0].entries.get(canon(a[1]))
            if entry is None:
                raise self.err(MISSING_KEY, "Called 'get' with a non-existing key", pos)
            return entry[1]
        if name == "put":
            need(len(a) == 3 and isinstance(a[0], VMap), "expects a map, key, value")
            entries = dict(a[0].entries)
            entries[canon(a[1])] = (a[1], a[2])
            return VMap(entries)
        if name == "getOrElse":
            need(len(a) == 3 and isinstance(a[0], VMap), "expects a map, key, default")
            entry = a[0].entries.get(canon(a[1]))
            return entry[1] if entry is not None else a[2]
        if name == "keys":
            need(len(a) == 1 and isinstance(a[0], VMap), "expects a map")
            return mk_set([k for k, _ in a[0].entries.values()])
        if name == "mapRemove":
            need(len(a) == 2 and isinstance(a[0], VMap), "expects a map and a key")
            entries = dict(a[0].entries)
            entries.pop(canon(a[1]), None)
            return VMap(entries)
        if name == "contains":
            need(len(a) == 2 and isinstance(a[0], VSet), "expects a set and a value")
            return VBool(canon(a[1]) in a[0].members)
        if name == "union":
            need(len(a) == 2 and all(isinstance(x, VSet) for x in a), "expects two sets")
            members = dict(a[0].members)
            members.update(a[1].members)
            return VSet(members)
        if name == "size":
            need(len(a) == 1 and isinstance(a[0], VSet), "expects a set")
            return VInt(len(a[0].members))
        if name in ("exists", "forall"):
            need(len(a) == 2 and isinstance(a[0], VSet), "expects a set and a predicate")
            results = (self._apply(a[1], [x], pos) for x in set_members(a[0]))
            hits = (isinstance(r, VBool) and r.b for r in results)
            return VBool(any(hits) if name == "exists" else all(hits))
        if name == "filter":
            need(len(a) == 2 and isinstance(a[0], VSet), "expects a set and a predicate")
            kept = [x for x in set_members(a[0])
                    if (lambda r: isinstance(r, VBool) and r.b)(self._apply(a[1], [x], pos))]
            return mk_set(kept)
        if name == "map":
            need(len(a) == 2 and isinstance(a[0], (VSet, VList)), "expects a set or list")
            if isinstance(a[0], VSet):
                return mk_set([self._apply(a[1], [x], pos) for x in set_members(a[0])])
            return VList([self._apply(a[1], [x], pos) for x in a[0].items])
        if name == "fold":
            need(len(a) == 3 and isinstance(a[0], VSet), "expects a set, init, combiner")
            acc = a[1]
            for x in set_members(a[0]):
                acc = self._apply(a[2], [acc, x], pos)
            return acc
        if name == "append":
            need(len(a) == 2 and isinstance(a[0], VList), "expects a list and a value")
            return VList(a[0].items + [a[1]])
        if name == "concat":
            need(len(a) == 2 and all(isinstance(x, VList) for x in a), "expects two lists")
            return VList(a[0].items + a[1].items)
        if name == "length":
            need(len(a) == 1 and isinstance(a[0], VList), "expects a list")
            return VInt(len(a[0].items))
        if name == "nth":
            need(len(a) == 2 and isinstance(a[0], VList) and isinstance(a[1], VInt),
                 "expects a list and an int")
            if not 0 <= a[1].n < len(a[0].items):
                raise self.err(INDEX_RANGE, f"Out of bounds, nth({a[1].n})", pos)
            return a[0].items[a[1].n]
        if name == "head":
            need(len(a) == 1 and isinstance(a[0], VList), "expects a list")
            if not a[0].items:
                raise self.err(INDEX_RANGE, "Called 'head' on an empty list", pos)
            return a[0].items[0]
        if name == "tail":
            need(len(a) == 1 and isinstance(a[0], VList), "expects a list")
            if not a[0].items:
                raise self.err(INDEX_RANGE, "Called 'tail' on an empty list", pos)
            return VList(a[0].items[1:])
        if name == "indices":
            need(len(a) == 1 and isinstance(a[0], VList), "expects a list")
            return mk_set([VInt(i) for i in range(len(a[0].items))])
        if name == "foldl":
            need(len(a) == 3 and isinstance(a[0], VList), "expects a list, init, combiner")
            acc = a[1]
            for x in a[0].items:
                acc = self._apply(a[2], [acc, x], pos)
            return acc
        if name == "select":
            need(len(a) == 2 and isinstance(a[0], VList), "expects a list and a predicate")
            kept = []
            for x in a[0].items:
                r = self._apply(a[1], [x], pos)
                if isinstance(r, VBool) and r.b:
                    kept.append(x)
            return VList(kept)
        if name == "toSet":
            need(len(a) == 1 and isinstance(a[0], VList), "expects a list")
            return mk_set(a[0].items)
        raise self.err(NAME_ERROR, f"Failed to resolve name {name}", pos)


def eval_pure(module: S.Module, name: str, args: list[Value],
              libs: list[S.Module] | None = None) -> Value:
    """Evaluate one call of a pure definition; raises RuntimeEvalError."""
    return Evaluator(module, libs).call(name, args)
