"""Typechecker for the modeling-language subset.

Collects diagnostics instead of failing fast. Inference is
unification-based; module definitions are monomorphic while builtin
operations and the predefined Option/Result sum types are generic.

Mode rules: pure definitions and values may not read state variables,
use all/any/nondet, or assign with primes; actions may do all of those
and must have boolean bodies. Matches must be exhaustive: every
constructor of the scrutinee's sum type is covered by an arm whose
sub-patterns are irrefutable, or a catch-all arm exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as S
from .diagnostics import (
    ARITY_ERROR, DUPLICATE_DEF, FIELD_ERROR, MATCH_ERROR, MODE_ERROR,
    NAME_ERROR, TYPE_MISMATCH, Diagnostic,
)
from .typesys import (
    BOOL, ERR, INT, STR, TCon, TErr, TFun, TList, TMap, TParam, TRec,
    TSet, TSum, TTup, TVar, Type, render_type,
)

# Builtin generic sum types: name -> (type params, [(ctor, payload or None)])
BUILTIN_SUMS: dict[str, tuple[list[str], list[tuple[str, Type | None]]]] = {
    "Option": (["a"], [("Some", TParam("a")), ("None", None)]),
    "Result": (["ok", "err"], [("Ok", TParam("ok")), ("Err", TParam("err"))]),
}

_A, _B = TParam("a"), TParam("b")

# Builtin operations: name -> list of (param types, return type) schemes.
BUILTIN_SCHEMES: dict[str, list[tuple[list[Type], Type]]] = {
    "to": [([INT, INT], TSet(INT))],
    "get": [([TMap(_A, _B), _A], _B)],
    "put": [([TMap(_A, _B), _A, _B], TMap(_A, _B))],
    "getOrElse": [([TMap(_A, _B), _A, _B], _B)],
    "keys": [([TMap(_A, _B)], TSet(_A))],
    "mapRemove": [([TMap(_A, _B), _A], TMap(_A, _B))],
    "contains": [([TSet(_A), _A], BOOL)],
    "union": [([TSet(_A), TSet(_A)], TSet(_A))],
    "size": [([TSet(_A)], INT)],
    "exists": [([TSet(_A), TFun([_A], BOOL)], BOOL)],
    "forall": [([TSet(_A), TFun([_A], BOOL)], BOOL)],
    "filter": [([TSet(_A), TFun([_A], BOOL)], TSet(_A))],
    "map": [([TSet(_A), TFun([_A], _B)], TSet(_B)),
            ([TList(_A), TFun([_A], _B)], TList(_B))],
    "fold": [([TSet(_A), _B, TFun([_B, _A], _B)], _B)],
    "append": [([TList(_A), _A], TList(_A))],
    "concat": [([TList(_A), TList(_A)], TList(_A))],
    "length": [([TList(_A)], INT)],
    "nth": [([TList(_A), INT], _A)],
    "head": [([TList(_A)], _A)],
    "tail": [([TList(_A)], TList(_A))],
    "indices": [([TList(_A)], TSet(INT))],
    "foldl": [([TList(_A), _B, TFun([_B, _A], _B)], _B)],
    "select": [([TList(_A), TFun([_A], BOOL)], TList(_A))],
    "toSet": [([TList(_A)], TSet(_A))],
}


@dataclass
class _DefSig:
    params: list[Type]
    ret: Type
    kind: str  # "pure" | "action"


class Typechecker:
    def __init__(self, module: S.Module, libs: list[S.Module] | None = None):
        self.module = module
        self.libs = libs or []
        self.diags: list[Diagnostic] = []
        self.subst: dict[int, Type] = {}
        self.next_var = 0
        self.aliases: dict[str, S.TypeExpr] = {}
        self.sums: dict[str, tuple[list[str], list[tuple[str, Type | None]]]] = dict(BUILTIN_SUMS)
        self.ctors: dict[str, str] = {"Some": "Option", "None": "Option",
                                      "Ok": "Result", "Err": "Result"}
        self.vars: dict[str, Type] = {}
        self.vals: dict[str, Type] = {}
        self.defs: dict[str, _DefSig] = {}
        self._alias_stack: list[str] = []

    # -------------------------------------------------------------- utils

    def report(self, code: str, message: str, pos: S.Pos) -> None:
        lines = self.module.source.splitlines()
        src = lines[pos.line - 1] if 0 < pos.line <= len(lines) else ""
        self.diags.append(Diagnostic(code, message, self.module.file,
                                     pos.line, pos.col, pos.width, src))

    def fresh(self) -> TVar:
        self.next_var += 1
        return TVar(self.next_var)

    def resolve(self, t: Type) -> Type:
        while isinstance(t, TVar) and t.id in self.subst:
            t = self.subst[t.id]
        return t

    def _occurs(self, vid: int, t: Type) -> bool:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t.id == vid
        if isinstance(t, (TList, TSet)):
            return self._occurs(vid, t.elem)
        if isinstance(t, TMap):
            return self._occurs(vid, t.key) or self._occurs(vid, t.value)
        if isinstance(t, TTup):
            return any(self._occurs(vid, i) for i in t.items)
        if isinstance(t, TRec):
            return any(self._occurs(vid, v) for v in t.fields.values())
        if isinstance(t, TSum):
            return any(self._occurs(vid, a) for a in t.args)
        if isinstance(t, TFun):
            return any(self._occurs(vid, p) for p in t.params) or self._occurs(vid, t.ret)
        return False

    def unify(self, a: Type, b: Type) -> bool:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, TErr) or isinstance(b, TErr):
            return True
        if isinstance(a, TVar):
            if isinstance(b, TVar) and b.id == a.id:
                return True
            if self._occurs(a.id, b):
                return False
            self.subst[a.id] = b
            return True
        if isinstance(b, TVar):
            return self.unify(b, a)
        if isinstance(a, TCon) and isinstance(b, TCon):
            return a.name == b.name
        if isinstance(a, TList) and isinstance(b, TList):
            return self.unify(a.elem, b.elem)
        if isinstance(a, TSet) and isinstance(b, TSet):
            return self.unify(a.elem, b.elem)
        if isinstance(a, TMap) and isinstance(b, TMap):
            return self.unify(a.key, b.key) and self.unify(a.value, b.value)
        if isinstance(a, TTup) and isinstance(b, TTup):
            return (len(a.items) == len(b.items)
                    and all(self.unify(x, y) for x, y in zip(a.items, b.items)))
        if isinstance(a, TRec) and isinstance(b, TRec):
            if set(a.fields) != set(b.fields):
                return False
            return all(self.unify(a.fields[k], b.fields[k]) for k in a.fields)
        if isinstance(a, TSum) and isinstance(b, TSum):
            return (a.name == b.name and len(a.args) == len(b.args)
                    and all(self.unify(x, y) for x, y in zip(a.args, b.args)))
        if isinstance(a, TFun) and isinstance(b, TFun):
            return (len(a.params) == len(b.params)
                    and all(self.unify(x, y) for x, y in zip(a.params, b.params))
                    and self.unify(a.ret, b.ret))
        return False

    def check_unify(self, a: Type, b: Type, pos: S.Pos, what: str) -> Type:
        if not self.unify(a, b):
            self.report(TYPE_MISMATCH,
                        f"{what}: expected {self.describe(b)}, got {self.describe(a)}", pos)
            return ERR
        return self.resolve(a)

    def describe(self, t: Type) -> str:
        return render_type(self._deep_resolve(t))

    def _deep_resolve(self, t: Type) -> Type:
        t = self.resolve(t)
        if isinstance(t, (TList, TSet)):
            return type(t)(self._deep_resolve(t.elem))
        if isinstance(t, TMap):
            return TMap(self._deep_resolve(t.key), self._deep_resolve(t.value))
        if isinstance(t, TTup):
            return TTup([self._deep_resolve(i) for i in t.items])
        if isinstance(t, TRec):
            return TRec({k: self._deep_resolve(v) for k, v in t.fields.items()})
        if isinstance(t, TSum):
            return TSum(t.name, [self._deep_resolve(a) for a in t.args])
        if isinstance(t, TFun):
            return TFun([self._deep_resolve(p) for p in t.params], self._deep_resolve(t.ret))
        return t

    def _instantiate(self, t: Type, mapping: dict[str, Type]) -> Type:
        if isinstance(t, TParam):
            return mapping.setdefault(t.name, self.fresh())
        if isinstance(t, (TList, TSet)):
            return type(t)(self._instantiate(t.elem, mapping))
        if isinstance(t, TMap):
            return TMap(self._instantiate(t.key, mapping), self._instantiate(t.value, mapping))
        if isinstance(t, TTup):
            return TTup([self._instantiate(i, mapping) for i in t.items])
        if isinstance(t, TRec):
            return TRec({k: self._instantiate(v, mapping) for k, v in t.fields.items()})
        if isinstance(t, TSum):
            return TSum(t.name, [self._instantiate(a, mapping) for a in t.args])
        if isinstance(t, TFun):
            return TFun([self._instantiate(p, mapping) for p in t.params],
                        self._instantiate(t.ret, mapping))
        return t

    # ------------------------------------------------------- declarations

    def build_type(self, te: S.TypeExpr) -> Type:
        if isinstance(te, S.TName):
            if te.name in ("int", "bool", "str") and not te.args:
                return TCon(te.name)
            if te.name == "List":
                if len(te.args) != 1:
                    self.report(ARITY_ERROR, "List takes one type argument", te.pos)
                    return ERR
                return TList(self.build_type(te.args[0]))
            if te.name == "Set":
                if len(te.args) != 1:
                    self.report(ARITY_ERROR, "Set takes one type argument", te.pos)
                    return ERR
                return TSet(self.build_type(te.args[0]))
            if te.name in self.sums:
                params, _ = self.sums[te.name]
                if len(te.args) != len(params):
                    self.report(ARITY_ERROR,
                                f"{te.name} takes {len(params)} type argument(s)", te.pos)
                    return ERR
                return TSum(te.name, [self.build_type(a) for a in te.args])
            if te.name in self.aliases:
                if te.args:
                    self.report(ARITY_ERROR, f"type {te.name} takes no arguments", te.pos)
                if te.name in self._alias_stack:
                    self.report(NAME_ERROR, f"cyclic type alias {te.name}", te.pos)
                    return ERR
                self._alias_stack.append(te.name)
                try:
                    return self.build_type(self.aliases[te.name])
                finally:
                    self._alias_stack.pop()
            self.report(NAME_ERROR, f"Failed to resolve type name {te.name}", te.pos)
            return ERR
        if isinstance(te, S.TMapT):
            return TMap(self.build_type(te.key), self.build_type(te.value))
        if isinstance(te, S.TTupleT):
            return TTup([self.build_type(i) for i in te.items])
        if isinstance(te, S.TRecordT):
            return TRec({n: self.build_type(t) for n, t in te.fields})
        raise TypeError(f"unknown type expr {te!r}")

    def run(self) -> list[Diagnostic]:
        all_decls: list[S.Decl] = []
        for lib in self.libs:
            all_decls.extend(lib.decls)
        all_decls.extend(self.module.decls)

        imported = {lib.name for lib in self.libs}
        for d in self.module.decls:
            if isinstance(d, S.DImport) and d.module not in imported:
                self.report(NAME_ERROR, f"imported module {d.module} not found", d.pos)

        # Pass 1: type declarations.
        for d in all_decls:
            if isinstance(d, S.DTypeAlias):
                if d.name in self.aliases or d.name in self.sums:
                    self.report(DUPLICATE_DEF, f"duplicate type {d.name}", d.pos)
                    continue
                self.aliases[d.name] = d.target
            elif isinstance(d, S.DSumType):
                if d.name in self.aliases or d.name in self.sums:
                    self.report(DUPLICATE_DEF, f"duplicate type {d.name}", d.pos)
                    continue
                self.sums[d.name] = ([], [])
        for d in all_decls:
            if isinstance(d, S.DSumType) and self.sums.get(d.name) == ([], []):
                ctors: list[tuple[str, Type | None]] = []
                for cname, payload in d.ctors:
                    if cname in self.ctors:
                        self.report(DUPLICATE_DEF, f"duplicate constructor {cname}", d.pos)
                        continue
                    ptype = self.build_type(payload) if payload is not None else None
                    ctors.append((cname, ptype))
                    self.ctors[cname] = d.name
                self.sums[d.name] = ([], ctors)

        # Pass 2: signatures for vars and defs (defs may be referenced forward).
        for d in all_decls:
            if isinstance(d, S.DVar):
                if d.name in self.vars:
                    self.report(DUPLICATE_DEF, f"duplicate variable {d.name}", d.pos)
                self.vars[d.name] = self.build_type(d.type)
            elif isinstance(d, S.DDef):
                if d.name in self.defs:
                    self.report(DUPLICATE_DEF, f"duplicate definition {d.name}", d.pos)
                    continue
                params = [self.build_type(t) for _, t in d.params]
                if d.kind == "action":
                    ret = self.build_type(d.ret) if d.ret is not None else BOOL
                else:
                    ret = self.build_type(d.ret) if d.ret is not None else self.fresh()
                self.defs[d.name] = _DefSig(params, ret, d.kind)

        # Pass 3: bodies, in declaration order.
        for d in all_decls:
            if isinstance(d, S.DVal):
                if d.name in self.vals or d.name in self.defs:
                    self.report(DUPLICATE_DEF, f"duplicate definition {d.name}", d.pos)
                    continue
                declared = self.build_type(d.type) if d.type is not None else None
                got = self.infer(d.value, {}, "pure")
                if declared is not None:
                    self.check_unify(got, declared, d.value.pos, f"value {d.name}")
                    self.vals[d.name] = declared
                else:
                    self.vals[d.name] = got
            elif isinstance(d, S.DDef):
                sig = self.defs.get(d.name)
                if sig is None:
                    continue
                env = {pname: ptype for (pname, _), ptype
                       in zip(d.params, sig.params)}
                got = self.infer(d.body, env, sig.kind)
                what = f"body of {d.name}"
                if d.kind == "action":
                    self.check_unify(got, BOOL, d.body.pos, what)
                else:
                    self.check_unify(got, sig.ret, d.body.pos, what)
        return self.diags

    # -------------------------------------------------------- expressions

    def infer(self, e: S.Expr, env: dict[str, Type], mode: str) -> Type:
        if isinstance(e, S.EInt):
            return INT
        if isinstance(e, S.EBool):
            return BOOL
        if isinstance(e, S.EStr):
            return STR
        if isinstance(e, S.EName):
            return self._infer_name(e, env, mode)
        if isinstance(e, S.ELet):
            vt = self.infer(e.value, env, mode)
            if e.type is not None:
                declared = self.build_type(e.type)
                self.check_unify(vt, declared, e.value.pos, f"binding {e.name}")
                vt = declared
            return self.infer(e.body, {**env, e.name: vt}, mode)
        if isinstance(e, S.ENondet):
            if mode != "action":
                self.report(MODE_ERROR, "nondet is only allowed inside actions", e.pos)
            if not (isinstance(e.choices, S.ECall) and e.choices.name == "oneOf"):
                self.report(MODE_ERROR, "nondet requires a oneOf(...) choice", e.pos)
                elem = ERR
            elif len(e.choices.args) != 1:
                self.report(ARITY_ERROR, "oneOf takes one set argument", e.choices.pos)
                elem = ERR
            else:
                st = self.infer(e.choices.args[0], env, mode)
                ev = self.fresh()
                self.check_unify(st, TSet(ev), e.choices.pos, "oneOf argument")
                elem = ev
            return self.infer(e.body, {**env, e.name: elem}, mode)
        if isinstance(e, S.EIf):
            ct = self.infer(e.cond, env, mode)
            self.check_unify(ct, BOOL, e.cond.pos, "if condition")
            tt = self.infer(e.then, env, mode)
            et = self.infer(e.otherwise, env, mode)
            return self.check_unify(et, tt, e.otherwise.pos, "if branches")
        if isinstance(e, S.ELambda):
            params = [self.fresh() for _ in e.params]
            body = self.infer(e.body, {**env, **dict(zip(e.params, params))}, mode)
            return TFun(list(params), body)
        if isinstance(e, S.ETuple):
            return TTup([self.infer(i, env, mode) for i in e.items])
        if isinstance(e, S.EList):
            elem = self.fresh()
            for item in e.items:
                self.check_unify(self.infer(item, env, mode), elem, item.pos, "list element")
            return TList(elem)
        if isinstance(e, S.ESet):
            elem = self.fresh()
            for item in e.items:
                self.check_unify(self.infer(item, env, mode), elem, item.pos, "set element")
            return TSet(elem)
        if isinstance(e, S.EMap):
            kt, vt = self.fresh(), self.fresh()
            for k, v in e.pairs:
                self.check_unify(self.infer(k, env, mode), kt, k.pos, "map key")
                self.check_unify(self.infer(v, env, mode), vt, v.pos, "map value")
            return TMap(kt, vt)
        if isinstance(e, S.ERecord):
            return TRec({n: self.infer(v, env, mode) for n, v in e.fields})
        if isinstance(e, S.ERecordUpdate):
            base = self.resolve(self.infer(e.base, env, mode))
            if isinstance(base, TErr):
                for _, v in e.fields:
                    self.infer(v, env, mode)
                return ERR
            if not isinstance(base, TRec):
                self.report(TYPE_MISMATCH,
                            f"record update on non-record {self.describe(base)}", e.base.pos)
                return ERR
            for n, v in e.fields:
                vt = self.infer(v, env, mode)
                if n not in base.fields:
                    self.report(FIELD_ERROR, f"unknown record field {n}", v.pos)
                    continue
                self.check_unify(vt, base.fields[n], v.pos, f"field {n}")
            return base
        if isinstance(e, S.EField):
            base = self.resolve(self.infer(e.base, env, mode))
            if isinstance(base, TErr):
                return ERR
            if not isinstance(base, TRec):
                self.report(TYPE_MISMATCH,
                            f"field access .{e.name} on non-record {self.describe(base)}",
                            e.pos)
                return ERR
            if e.name not in base.fields:
                self.report(FIELD_ERROR, f"record has no field {e.name}", e.pos)
                return ERR
            return base.fields[e.name]
        if isinstance(e, S.ETupleGet):
            base = self.resolve(self.infer(e.base, env, mode))
            if isinstance(base, TErr):
                return ERR
            if not isinstance(base, TTup) or e.index < 1 or e.index > len(base.items):
                self.report(TYPE_MISMATCH,
                            f"no tuple component _{e.index} on {self.describe(base)}", e.pos)
                return ERR
            return base.items[e.index - 1]
        if isinstance(e, S.EIndex):
            base = self.infer(e.base, env, mode)
            elem = self.fresh()
            self.check_unify(base, TList(elem), e.base.pos, "indexing")
            self.check_unify(self.infer(e.index, env, mode), INT, e.index.pos, "list index")
            return elem
        if isinstance(e, S.EUnop):
            ot = self.infer(e.operand, env, mode)
            want = BOOL if e.op == "not" else INT
            self.check_unify(ot, want, e.operand.pos, f"operand of {e.op}")
            return want
        if isinstance(e, S.EBinop):
            return self._infer_binop(e, env, mode)
        if isinstance(e, S.EMatch):
            return self._infer_match(e, env, mode)
        if isinstance(e, S.ECall):
            return self._infer_call(e, env, mode)
        if isinstance(e, S.EPrime):
            if mode != "action":
                self.report(MODE_ERROR, "primed assignment outside an action", e.pos)
            if e.var not in self.vars:
                self.report(NAME_ERROR, f"Failed to resolve state variable {e.var}", e.pos)
                self.infer(e.value, env, mode)
                return BOOL
            vt = self.infer(e.value, env, mode)
            self.check_unify(vt, self.vars[e.var], e.value.pos, f"assignment to {e.var}'")
            return BOOL
        if isinstance(e, (S.EAll, S.EAny)):
            kw = "all" if isinstance(e, S.EAll) else "any"
            if mode != "action":
                self.report(MODE_ERROR, f"{kw} is only allowed inside actions", e.pos)
            for item in e.items:
                self.check_unify(self.infer(item, env, mode), BOOL, item.pos,
                                 f"element of {kw}")
            return BOOL
        raise TypeError(f"unknown expression {e!r}")

    def _infer_name(self, e: S.EName, env: dict[str, Type], mode: str) -> Type:
        if e.name in env:
            return env[e.name]
        if e.name in self.vals:
            return self.vals[e.name]
        if e.name in self.vars:
            if mode != "action":
                self.report(MODE_ERROR,
                            f"state variable {e.name} read outside an action", e.pos)
            return self.vars[e.name]
        if e.name in self.ctors:
            sum_name = self.ctors[e.name]
            params, ctors = self.sums[sum_name]
            payload = dict(ctors).get(e.name)
            if payload is not None:
                self.report(ARITY_ERROR,
                            f"constructor {e.name} requires a payload argument", e.pos)
                return ERR
            mapping: dict[str, Type] = {}
            args = [self._instantiate(TParam(p), mapping) for p in params]
            return TSum(sum_name, args)
        if e.name in self.defs:
            sig = self.defs[e.name]
            if sig.kind == "action":
                # Zero-parameter actions compose by name inside other
                # actions; anywhere else the reference is a mode fault.
                if mode != "action":
                    self.report(MODE_ERROR,
                                f"action {e.name} used outside an action", e.pos)
                    return ERR
                if sig.params:
                    self.report(ARITY_ERROR,
                                f"action {e.name} takes arguments", e.pos)
                    return ERR
                return BOOL
            self.report(TYPE_MISMATCH,
                        f"{e.name} is a definition and must be called", e.pos)
            return ERR
        self.report(NAME_ERROR, f"Failed to resolve name {e.name}", e.pos)
        return ERR

    def _infer_binop(self, e: S.EBinop, env: dict[str, Type], mode: str) -> Type:
        lt = self.infer(e.left, env, mode)
        rt = self.infer(e.right, env, mode)
        if e.op in ("and", "or"):
            self.check_unify(lt, BOOL, e.left.pos, f"operand of {e.op}")
            self.check_unify(rt, BOOL, e.right.pos, f"operand of {e.op}")
            return BOOL
        if e.op in ("==", "!="):
            self.check_unify(rt, lt, e.right.pos, f"operands of {e.op}")
            return BOOL
        if e.op in ("<", "<=", ">", ">="):
            self.check_unify(lt, INT, e.left.pos, f"operand of {e.op}")
            self.check_unify(rt, INT, e.right.pos, f"operand of {e.op}")
            return BOOL
        self.check_unify(lt, INT, e.left.pos, f"operand of {e.op}")
        self.check_unify(rt, INT, e.right.pos, f"operand of {e.op}")
        return INT

    def _infer_match(self, e: S.EMatch, env: dict[str, Type], mode: str) -> Type:
        st = self.resolve(self.infer(e.scrutinee, env, mode))
        sum_name = None
        inst_args: dict[str, Type] = {}
        if isinstance(st, TSum):
            sum_name = st.name
            params, _ = self.sums[sum_name]
            inst_args = dict(zip(params, st.args))
        elif not isinstance(st, TErr):
            self.report(TYPE_MISMATCH,
                        f"match on non-variant value of type {self.describe(st)}",
                        e.scrutinee.pos)
        result: Type | None = None
        covered: set[str] = set()
        catch_all = False
        for pat, body in e.arms:
            bound: dict[str, Type] = {}
            irrefutable = self._check_pattern(pat, st, sum_name, inst_args, bound, covered)
            if isinstance(pat, (S.PWild, S.PBind)):
                catch_all = True
            elif isinstance(pat, S.PCtor) and irrefutable:
                covered.add(pat.name)
            bt = self.infer(body, {**env, **bound}, mode)
            if result is None:
                result = bt
            else:
                result = self.check_unify(bt, result, body.pos, "match arms")
        if sum_name is not None and not catch_all:
            _, ctors = self.sums[sum_name]
            missing = [c for c, _ in ctors if c not in covered]
            if missing:
                self.report(MATCH_ERROR,
                            f"match is not exhaustive: missing {', '.join(missing)}",
                            e.pos)
        return result if result is not None else ERR

    def _check_pattern(self, pat: S.Pattern, st: Type, sum_name: str | None,
                       inst_args: dict[str, Type], bound: dict[str, Type],
                       covered: set[str]) -> bool:
        """Check one pattern; returns True when it is irrefutable below the ctor."""
        if isinstance(pat, S.PWild):
            return True
        if isinstance(pat, S.PBind):
            bound[pat.name] = st
            return True
        if isinstance(pat, S.PCtor):
            if sum_name is None:
                return False
            _, ctors = self.sums[sum_name]
            table = dict(ctors)
            if pat.name not in table:
                self.report(MATCH_ERROR,
                            f"{pat.name} is not a constructor of {sum_name}", pat.pos)
                return False
            payload = table[pat.name]
            if payload is None:
                if pat.args:
                    self.report(ARITY_ERROR,
                                f"constructor {pat.name} carries no payload", pat.pos)
                return True
            ptype = self.resolve(self._instantiate(payload, inst_args))
            if not pat.args:
                if pat.parens:
                    self.report(ARITY_ERROR,
                                f"constructor {pat.name} requires a payload pattern", pat.pos)
                return False
            sub = pat.args[0]
            sub_sum = sub.name if isinstance(sub, S.PCtor) else None
            if sub_sum is not None:
                inner_name = self.ctors.get(sub_sum)
                if inner_name is None:
                    self.report(MATCH_ERROR, f"unknown constructor {sub_sum}", sub.pos)
                    return False
                inner_params, _ = self.sums[inner_name]
                mapping: dict[str, Type] = {}
                inner_ty = TSum(inner_name,
                                [self._instantiate(TParam(p), mapping) for p in inner_params])
                self.check_unify(ptype, inner_ty, sub.pos, f"payload of {pat.name}")
                return self._check_pattern(sub, self.resolve(inner_ty), inner_name,
                                           mapping, bound, covered) and False
            return self._check_pattern(sub, ptype, None, {}, bound, covered)
        return False

    def _infer_call(self, e: S.ECall, env: dict[str, Type], mode: str) -> Type:
        args = e.args
        if e.name == "oneOf":
            self.report(MODE_ERROR, "oneOf may only appear as a nondet choice", e.pos)
            for a in args:
                self.infer(a, env, mode)
            return ERR
        # Constructor application.
        if e.name in self.ctors and e.name not in self.defs:
            sum_name = self.ctors[e.name]
            params, ctors = self.sums[sum_name]
            payload = dict(ctors)[e.name]
            if payload is None:
                self.report(ARITY_ERROR, f"constructor {e.name} carries no payload", e.pos)
                for a in args:
                    self.infer(a, env, mode)
                return ERR
            mapping: dict[str, Type] = {}
            want = self._instantiate(payload, mapping)
            sum_args = [self._instantiate(TParam(p), mapping) for p in params]
            if len(args) != 1:
                self.report(ARITY_ERROR,
                            f"constructor {e.name} takes exactly one argument", e.pos)
                for a in args:
                    self.infer(a, env, mode)
                return TSum(sum_name, sum_args)
            got = self.infer(args[0], env, mode)
            self.check_unify(got, want, args[0].pos, f"payload of {e.name}")
            return TSum(sum_name, sum_args)
        # Module definition call.
        if e.name in self.defs:
            sig = self.defs[e.name]
            if sig.kind == "action" and mode != "action":
                self.report(MODE_ERROR, f"action {e.name} called from pure context", e.pos)
            if len(args) != len(sig.params):
                self.report(ARITY_ERROR,
                            f"{e.name} takes {len(sig.params)} argument(s), got {len(args)}",
                            e.pos)
                for a in args:
                    self.infer(a, env, mode)
                return sig.ret
            for a, want in zip(args, sig.params):
                got = self.infer(a, env, mode)
                self.check_unify(got, want, a.pos, f"argument of {e.name}")
            return sig.ret
        # A lambda bound to a name (builtin higher-order arguments only).
        if e.name in env:
            fn = self.resolve(env[e.name])
            if isinstance(fn, TFun) and len(fn.params) == len(args):
                for a, want in zip(args, fn.params):
                    self.check_unify(self.infer(a, env, mode), want, a.pos,
                                     f"argument of {e.name}")
                return fn.ret
            self.report(TYPE_MISMATCH, f"{e.name} is not callable", e.pos)
            for a in args:
                self.infer(a, env, mode)
            return ERR
        # Builtin operation, possibly overloaded.
        if e.name in BUILTIN_SCHEMES:
            return self._infer_builtin(e, env, mode)
        self.report(NAME_ERROR, f"Failed to resolve name {e.name}", e.pos)
        for a in args:
            self.infer(a, env, mode)
        return ERR

    def _infer_builtin(self, e: S.ECall, env: dict[str, Type], mode: str) -> Type:
        schemes = BUILTIN_SCHEMES[e.name]
        arg_types = [self.infer(a, env, mode) for a in e.args]
        last_error: str | None = None
        for params, ret in schemes:
            if len(params) != len(arg_types):
                last_error = (f"{e.name} takes {len(params)} argument(s), "
                              f"got {len(arg_types)}")
                continue
            snapshot = dict(self.subst)
            mapping: dict[str, Type] = {}
            inst = [self._instantiate(p, mapping) for p in params]
            ok = True
            for got, want, arg in zip(arg_types, inst, e.args):
                if not self.unify(got, want):
                    last_error = (f"argument of {e.name}: expected {self.describe(want)}, "
                                  f"got {self.describe(got)}")
                    ok = False
                    break
            if ok:
                return self._instantiate(ret, mapping)
            self.subst = snapshot
        code = ARITY_ERROR if last_error and "argument(s)" in last_error else TYPE_MISMATCH
        self.report(code, last_error or f"cannot type {e.name}", e.pos)
        return ERR


def typecheck(module: S.Module, libs: list[S.Module] | None = None) -> list[Diagnostic]:
    """Typecheck a module; returns diagnostics (empty means well-typed)."""
    return Typechecker(module, libs).run()
