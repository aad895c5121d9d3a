"""Independent reference interpreter used as a differential oracle.

Deliberately written apart from the kernel evaluator: plain Python
values (ints, strs, lists, tuples, dicts for records) plus tiny wrapper
classes for maps, sets, and variants. Only the parser and AST node
types are shared; evaluation, builtins, ordering, and error detection
are re-implemented from the documented language rules.
"""

from __future__ import annotations

from dataclasses import dataclass

from quintsmith.kernel import syntax as S


class RefError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass
class RMap:
    entries: list  # list of (key, value) pairs, insertion order


@dataclass
class RSet:
    items: list    # deduplicated, arbitrary order


@dataclass
class RVariant:
    name: str
    payload: object = None
    has_payload: bool = False


@dataclass
class RLambda:
    params: list
    body: object
    env: dict


def canon(v):
    """Canonical, comparable, hashable form of a reference value."""
    if isinstance(v, bool):
        return ("bool", v)
    if isinstance(v, int):
        return ("int", v)
    if isinstance(v, str):
        return ("str", v)
    if isinstance(v, list):
        return ("list", tuple(canon(x) for x in v))
    if isinstance(v, tuple):
        return ("tup", tuple(canon(x) for x in v))
    if isinstance(v, dict):
        return ("rec", tuple(sorted((k, canon(x)) for k, x in v.items())))
    if isinstance(v, RMap):
        return ("map", tuple(sorted((canon(k), canon(x)) for k, x in v.entries)))
    if isinstance(v, RSet):
        return ("set", tuple(sorted(canon(x) for x in v.items)))
    if isinstance(v, RVariant):
        return ("variant", v.name, canon(v.payload) if v.has_payload else None)
    raise TypeError(f"cannot canonicalize {v!r}")


def _map_lookup(m: RMap, key):
    ck = canon(key)
    for k, v in m.entries:
        if canon(k) == ck:
            return v
    raise RefError("QNT507", "Called 'get' with a non-existing key")


def _map_put(m: RMap, key, value) -> RMap:
    ck = canon(key)
    out = [(k, v) for k, v in m.entries if canon(k) != ck]
    out.append((key, value))
    return RMap(out)


def _set_add_all(items: list, more: list) -> list:
    seen = {canon(x) for x in items}
    out = list(items)
    for x in more:
        c = canon(x)
        if c not in seen:
            seen.add(c)
            out.append(x)
    return out


class RefInterpreter:
    def __init__(self, module: S.Module):
        self.module = module
        self.ctors: dict[str, bool] = {"None": False, "Some": True, "Ok": True, "Err": True}
        for d in module.decls:
            if isinstance(d, S.DSumType):
                for cname, payload in d.ctors:
                    self.ctors[cname] = payload is not None
        self.globals: dict[str, object] = {}
        for d in module.decls:
            if isinstance(d, S.DDef) and d.kind == "pure":
                self.globals[d.name] = ("def", d)
        for d in module.decls:
            if isinstance(d, S.DVal):
                self.globals[d.name] = self.eval(d.value, {})

    def call(self, name: str, args: list):
        entry = self.globals.get(name)
        if not (isinstance(entry, tuple) and entry[0] == "def"):
            raise RefError("QNT001", f"no definition named {name}")
        d = entry[1]
        env = {p: a for (p, _), a in zip(d.params, args)}
        return self.eval(d.body, env)

    def eval(self, e, env: dict):
        if isinstance(e, S.EInt):
            return e.value
        if isinstance(e, S.EBool):
            return e.value
        if isinstance(e, S.EStr):
            return e.value
        if isinstance(e, S.EName):
            if e.name in env:
                return env[e.name]
            if e.name in self.globals and not isinstance(self.globals.get(e.name), tuple):
                return self.globals[e.name]
            if e.name in self.ctors:
                if self.ctors[e.name]:
                    raise RefError("QNT003", f"constructor {e.name} needs a payload")
                return RVariant(e.name)
            if isinstance(self.globals.get(e.name), tuple):
                raise RefError("QNT002", f"{e.name} is a definition, not a value")
            raise RefError("QNT001", f"unbound name {e.name}")
        if isinstance(e, S.ELet):
            return self.eval(e.body, {**env, e.name: self.eval(e.value, env)})
        if isinstance(e, S.EIf):
            return self.eval(e.then if self.eval(e.cond, env) else e.otherwise, env)
        if isinstance(e, S.ELambda):
            return RLambda(e.params, e.body, env)
        if isinstance(e, S.ETuple):
            return tuple(self.eval(x, env) for x in e.items)
        if isinstance(e, S.EList):
            return [self.eval(x, env) for x in e.items]
        if isinstance(e, S.ESet):
            return RSet(_set_add_all([], [self.eval(x, env) for x in e.items]))
        if isinstance(e, S.EMap):
            m = RMap([])
            for k, v in e.pairs:
                m = _map_put(m, self.eval(k, env), self.eval(v, env))
            return m
        if isinstance(e, S.ERecord):
            return {n: self.eval(v, env) for n, v in e.fields}
        if isinstance(e, S.ERecordUpdate):
            base = self.eval(e.base, env)
            out = dict(base)
            for n, v in e.fields:
                if n not in out:
                    raise RefError("QNT005", f"no field {n}")
                out[n] = self.eval(v, env)
            return out
        if isinstance(e, S.EField):
            base = self.eval(e.base, env)
            if not isinstance(base, dict) or e.name not in base:
                raise RefError("QNT005", f"no field {e.name}")
            return base[e.name]
        if isinstance(e, S.ETupleGet):
            base = self.eval(e.base, env)
            if not isinstance(base, tuple) or e.index > len(base):
                raise RefError("QNT005", f"no component _{e.index}")
            return base[e.index - 1]
        if isinstance(e, S.EIndex):
            base = self.eval(e.base, env)
            idx = self.eval(e.index, env)
            if not 0 <= idx < len(base):
                raise RefError("QNT510", f"Out of bounds, nth({idx})")
            return base[idx]
        if isinstance(e, S.EUnop):
            v = self.eval(e.operand, env)
            return (not v) if e.op == "not" else -v
        if isinstance(e, S.EBinop):
            return self._binop(e, env)
        if isinstance(e, S.EMatch):
            return self._match(e, env)
        if isinstance(e, S.ECall):
            return self._call(e, env)
        raise RefError("QNT500", f"cannot evaluate {type(e).__name__}")

    def _binop(self, e, env):
        if e.op == "and":
            return bool(self.eval(e.left, env)) and bool(self.eval(e.right, env))
        if e.op == "or":
            return bool(self.eval(e.left, env)) or bool(self.eval(e.right, env))
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if e.op == "==":
            return canon(a) == canon(b)
        if e.op == "!=":
            return canon(a) != canon(b)
        if e.op in ("<", "<=", ">", ">="):
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[e.op]
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op in ("/", "%"):
            if b == 0:
                raise RefError("QNT511", "Division by zero")
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            return q if e.op == "/" else a - b * q
        raise RefError("QNT500", f"operator {e.op}")

    def _match(self, e, env):
        subject = self.eval(e.scrutinee, env)
        for pat, body in e.arms:
            bound = {}
            if self._match_pat(pat, subject, bound):
                return self.eval(body, {**env, **bound})
        raise RefError("QNT505", "no match arm applies")

    def _match_pat(self, pat, value, bound) -> bool:
        if isinstance(pat, S.PWild):
            return True
        if isinstance(pat, S.PBind):
            bound[pat.name] = value
            return True
        if isinstance(pat, S.PCtor):
            if not isinstance(value, RVariant) or value.name != pat.name:
                return False
            if not pat.args:
                return True
            return self._match_pat(pat.args[0], value.payload, bound)
        return False

    def _apply(self, fn, args):
        if isinstance(fn, RLambda):
            env = dict(fn.env)
            for p, a in zip(fn.params, args):
                env[p] = a
            return self.eval(fn.body, env)
        raise RefError("QNT002", "not a function")

    def _call(self, e, env):
        name = e.name
        if name in self.ctors and name not in self.globals:
            payload = self.eval(e.args[0], env)
            return RVariant(name, payload, True)
        if name in self.globals and isinstance(self.globals[name], tuple):
            return self.call(name, [self.eval(a, env) for a in e.args])
        args = [self.eval(a, env) for a in e.args]
        return self._builtin(name, args)

    def _builtin(self, name, a):
        if name == "to":
            lo, hi = a
            return RSet(list(range(lo, hi + 1)))
        if name == "get":
            return _map_lookup(a[0], a[1])
        if name == "put":
            return _map_put(a[0], a[1], a[2])
        if name == "getOrElse":
            try:
                return _map_lookup(a[0], a[1])
            except RefError:
                return a[2]
        if name == "keys":
            return RSet(_set_add_all([], [k for k, _ in a[0].entries]))
        if name == "mapRemove":
            ck = canon(a[1])
            return RMap([(k, v) for k, v in a[0].entries if canon(k) != ck])
        if name == "contains":
            return canon(a[1]) in {canon(x) for x in a[0].items}
        if name == "union":
            return RSet(_set_add_all(a[0].items, a[1].items))
        if name == "size":
            return len(a[0].items)
        if name == "exists":
            return any(self._apply(a[1], [x]) for x in self._ordered(a[0]))
        if name == "forall":
            return all(self._apply(a[1], [x]) for x in self._ordered(a[0]))
        if name == "filter":
            return RSet([x for x in a[0].items if self._apply(a[1], [x])])
        if name == "map":
            if isinstance(a[0], RSet):
                return RSet(_set_add_all([], [self._apply(a[1], [x]) for x in a[0].items]))
            return [self._apply(a[1], [x]) for x in a[0]]
        if name == "fold":
            acc = a[1]
            for x in self._ordered(a[0]):
                acc = self._apply(a[2], [acc, x])
            return acc
        if name == "append":
            return a[0] + [a[1]]
        if name == "concat":
            return a[0] + a[1]
        if name == "length":
            return len(a[0])
        if name == "nth":
            if not 0 <= a[1] < len(a[0]):
                raise RefError("QNT510", f"Out of bounds, nth({a[1]})")
            return a[0][a[1]]
        if name == "head":
            if not a[0]:
                raise RefError("QNT510", "Called 'head' on an empty list")
            return a[0][0]
        if name == "tail":
            if not a[0]:
                raise RefError("QNT510", "Called 'tail' on an empty list")
            return a[0][1:]
        if name == "indices":
            return RSet(list(range(len(a[0]))))
        if name == "foldl":
            acc = a[1]
            for x in a[0]:
                acc = self._apply(a[2], [acc, x])
            return acc
        if name == "select":
            return [x for x in a[0] if self._apply(a[1], [x])]
        if name == "toSet":
            return RSet(_set_add_all([], a[0]))
        raise RefError("QNT001", f"unknown builtin {name}")

    def _ordered(self, s: RSet) -> list:
        return sorted(s.items, key=canon)


def ref_eval_call(module: S.Module, fn: str, args: list):
    return RefInterpreter(module).call(fn, args)
