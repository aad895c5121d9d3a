"""Canonical source printer for the modeling-language AST.

print(parse(text)) is a fixed point: parsing the printed text and
printing again yields the same string. Comments are not part of the AST
and do not survive printing; tooling that must preserve comments splices
raw source text using declaration spans instead.
"""

from __future__ import annotations

from .syntax import (
    DDef, DImport, DSumType, DTypeAlias, DVal, DVar, Decl, EAll, EAny,
    EBinop, EBool, ECall, EField, EIf, EIndex, EInt, ELambda, ELet, EList,
    EMap, EMatch, EName, ENondet, EPrime, ERecord, ERecordUpdate, ESet,
    EStr, ETuple, ETupleGet, EUnop, Expr, Module, Pattern, PBind, PCtor,
    PWild, TMapT, TName, TRecordT, TTupleT, TypeExpr,
)

_BINOP_PREC = {
    "or": 1, "and": 2,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}

_IND = "  "


def _prec(e: Expr) -> int:
    if isinstance(e, (EIf, ELambda, EPrime)):
        return 0
    if isinstance(e, EBinop):
        return _BINOP_PREC[e.op]
    if isinstance(e, EUnop):
        return 3 if e.op == "not" else 7
    if isinstance(e, (EField, ETupleGet, EIndex)):
        return 8
    if isinstance(e, ECall) and e.method_receiver:
        return 8
    return 9


def quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def print_type(t: TypeExpr) -> str:
    if isinstance(t, TName):
        if t.args:
            return f"{t.name}[{', '.join(print_type(a) for a in t.args)}]"
        return t.name
    if isinstance(t, TMapT):
        key = print_type(t.key)
        if isinstance(t.key, TMapT):
            key = f"({key})"
        return f"{key} -> {print_type(t.value)}"
    if isinstance(t, TTupleT):
        return f"({', '.join(print_type(i) for i in t.items)})"
    if isinstance(t, TRecordT):
        if not t.fields:
            return "{}"
        inner = ", ".join(f"{n}: {print_type(ft)}" for n, ft in t.fields)
        return f"{{ {inner} }}"
    raise TypeError(f"unknown type node {t!r}")


def print_pattern(p: Pattern) -> str:
    if isinstance(p, PWild):
        return "_"
    if isinstance(p, PBind):
        return p.name
    if isinstance(p, PCtor):
        if p.args or p.parens:
            return f"{p.name}({', '.join(print_pattern(a) for a in p.args)})"
        return p.name
    raise TypeError(f"unknown pattern node {p!r}")


def _child(e: Expr, parent_prec: int, indent: int, strict: bool = False) -> str:
    text = print_expr(e, indent)
    p = _prec(e)
    if p < parent_prec or (strict and p == parent_prec):
        return f"({text})"
    return text


def print_expr(e: Expr, indent: int = 0) -> str:
    pad = _IND * indent
    inner = _IND * (indent + 1)
    if isinstance(e, EInt):
        return str(e.value)
    if isinstance(e, EBool):
        return "true" if e.value else "false"
    if isinstance(e, EStr):
        return quote(e.value)
    if isinstance(e, EName):
        return e.name
    if isinstance(e, ECall):
        if e.method_receiver:
            recv = _child(e.args[0], 8, indent)
            args = ", ".join(print_expr(a, indent) for a in e.args[1:])
            return f"{recv}.{e.name}({args})"
        args = ", ".join(print_expr(a, indent) for a in e.args)
        return f"{e.name}({args})"
    if isinstance(e, ELambda):
        body = print_expr(e.body, indent)
        if len(e.params) == 1:
            return f"{e.params[0]} => {body}"
        return f"({', '.join(e.params)}) => {body}"
    if isinstance(e, EIf):
        return (f"if ({print_expr(e.cond, indent)}) {print_expr(e.then, indent)}"
                f" else {print_expr(e.otherwise, indent)}")
    if isinstance(e, (ELet, ENondet)):
        lines = ["{"]
        cur: Expr = e
        while isinstance(cur, (ELet, ENondet)):
            if isinstance(cur, ELet):
                ann = f": {print_type(cur.type)}" if cur.type is not None else ""
                lines.append(f"{inner}val {cur.name}{ann} = {print_expr(cur.value, indent + 1)}")
            else:
                lines.append(f"{inner}nondet {cur.name} = {print_expr(cur.choices, indent + 1)}")
            cur = cur.body
        lines.append(f"{inner}{print_expr(cur, indent + 1)}")
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    if isinstance(e, EMatch):
        lines = [f"match {print_expr(e.scrutinee, indent)} {{"]
        for pat, body in e.arms:
            lines.append(f"{inner}| {print_pattern(pat)} => {print_expr(body, indent + 1)}")
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    if isinstance(e, ERecord):
        if not e.fields:
            return "{}"
        inner_txt = ", ".join(f"{n}: {print_expr(v, indent)}" for n, v in e.fields)
        return f"{{ {inner_txt} }}"
    if isinstance(e, ERecordUpdate):
        parts = [f"...{print_expr(e.base, indent)}"]
        parts += [f"{n}: {print_expr(v, indent)}" for n, v in e.fields]
        return f"{{ {', '.join(parts)} }}"
    if isinstance(e, ETuple):
        return f"({', '.join(print_expr(i, indent) for i in e.items)})"
    if isinstance(e, EList):
        return f"[{', '.join(print_expr(i, indent) for i in e.items)}]"
    if isinstance(e, ESet):
        return f"Set({', '.join(print_expr(i, indent) for i in e.items)})"
    if isinstance(e, EMap):
        pairs = ", ".join(f"{print_expr(k, indent)} -> {print_expr(v, indent)}"
                          for k, v in e.pairs)
        return f"Map({pairs})"
    if isinstance(e, EField):
        return f"{_child(e.base, 8, indent)}.{e.name}"
    if isinstance(e, ETupleGet):
        return f"{_child(e.base, 8, indent)}._{e.index}"
    if isinstance(e, EIndex):
        return f"{_child(e.base, 8, indent)}[{print_expr(e.index, indent)}]"
    if isinstance(e, EUnop):
        if e.op == "not":
            return f"not {_child(e.operand, 3, indent)}"
        return f"-{_child(e.operand, 7, indent)}"
    if isinstance(e, EBinop):
        p = _BINOP_PREC[e.op]
        left = _child(e.left, p, indent, strict=(p == 4))
        right = _child(e.right, p, indent, strict=True)
        return f"{left} {e.op} {right}"
    if isinstance(e, EPrime):
        return f"{e.var}' = {print_expr(e.value, indent)}"
    if isinstance(e, (EAll, EAny)):
        kw = "all" if isinstance(e, EAll) else "any"
        lines = [f"{kw} {{"]
        for item in e.items:
            lines.append(f"{inner}{print_expr(item, indent + 1)},")
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    raise TypeError(f"unknown expression node {e!r}")


def print_decl(d: Decl, indent: int = 0) -> str:
    pad = _IND * indent
    if isinstance(d, DImport):
        return f"{pad}import {d.module}.* from {quote(d.path)}"
    if isinstance(d, DTypeAlias):
        return f"{pad}type {d.name} = {print_type(d.target)}"
    if isinstance(d, DSumType):
        parts = []
        for name, payload in d.ctors:
            parts.append(f"{name}({print_type(payload)})" if payload is not None else name)
        # a single nullary variant needs the leading bar to stay a sum type
        bar = "| " if len(parts) == 1 and d.ctors[0][1] is None else ""
        return f"{pad}type {d.name} = {bar}{' | '.join(parts)}"
    if isinstance(d, DVar):
        return f"{pad}var {d.name}: {print_type(d.type)}"
    if isinstance(d, DVal):
        kw = "pure val" if d.pure else "val"
        ann = f": {print_type(d.type)}" if d.type is not None else ""
        return f"{pad}{kw} {d.name}{ann} = {print_expr(d.value, indent)}"
    if isinstance(d, DDef):
        kw = "pure def" if d.kind == "pure" else "action"
        params = ", ".join(f"{n}: {print_type(t)}" for n, t in d.params)
        plist = f"({params})" if (d.params or d.has_parens) else ""
        ann = f": {print_type(d.ret)}" if d.ret is not None else ""
        return f"{pad}{kw} {d.name}{plist}{ann} = {print_expr(d.body, indent)}"
    raise TypeError(f"unknown declaration {d!r}")


def print_module(m: Module) -> str:
    lines = [f"module {m.name} {{"]
    for d in m.decls:
        lines.append(print_decl(d, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"
