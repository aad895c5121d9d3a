"""Internal type representation for the typechecker."""

from __future__ import annotations

from dataclasses import dataclass, field


class Type:
    pass


@dataclass(frozen=True)
class TCon(Type):
    name: str  # "int" | "bool" | "str"


@dataclass(frozen=True)
class TParam(Type):
    name: str  # placeholder inside builtin schemes and generic sum decls


@dataclass
class TVar(Type):
    id: int


@dataclass
class TList(Type):
    elem: Type


@dataclass
class TSet(Type):
    elem: Type


@dataclass
class TMap(Type):
    key: Type
    value: Type


@dataclass
class TTup(Type):
    items: list[Type]


@dataclass
class TRec(Type):
    fields: dict[str, Type]


@dataclass
class TSum(Type):
    name: str
    args: list[Type] = field(default_factory=list)


@dataclass
class TFun(Type):
    params: list[Type]
    ret: Type


@dataclass(frozen=True)
class TErr(Type):
    """Error placeholder; unifies with everything to stop cascades."""


INT = TCon("int")
BOOL = TCon("bool")
STR = TCon("str")
ERR = TErr()


def render_type(t: Type) -> str:
    if isinstance(t, TCon):
        return t.name
    if isinstance(t, TParam):
        return t.name
    if isinstance(t, TVar):
        return f"t{t.id}"
    if isinstance(t, TList):
        return f"List[{render_type(t.elem)}]"
    if isinstance(t, TSet):
        return f"Set[{render_type(t.elem)}]"
    if isinstance(t, TMap):
        key = render_type(t.key)
        if isinstance(t.key, TMap):
            key = f"({key})"
        return f"{key} -> {render_type(t.value)}"
    if isinstance(t, TTup):
        return f"({', '.join(render_type(i) for i in t.items)})"
    if isinstance(t, TRec):
        inner = ", ".join(f"{k}: {render_type(v)}" for k, v in t.fields.items())
        return f"{{ {inner} }}"
    if isinstance(t, TSum):
        if t.args:
            return f"{t.name}[{', '.join(render_type(a) for a in t.args)}]"
        return t.name
    if isinstance(t, TFun):
        return f"({', '.join(render_type(p) for p in t.params)}) => {render_type(t.ret)}"
    if isinstance(t, TErr):
        return "<error>"
    raise TypeError(f"unknown type {t!r}")
