"""AST for the modeling-language subset.

Every node carries a source position (line, col, width) so both static
and runtime diagnostics can render a caret under the offending text.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Pos:
    line: int = 0
    col: int = 0
    width: int = 1
    offset: int = -1  # byte offset in the source, -1 when synthetic


# ---------------------------------------------------------------- types

@dataclass
class TypeExpr:
    pos: Pos = field(default_factory=Pos, kw_only=True)


@dataclass
class TName(TypeExpr):
    name: str
    args: list[TypeExpr] = field(default_factory=list)


@dataclass
class TMapT(TypeExpr):
    key: TypeExpr
    value: TypeExpr


@dataclass
class TTupleT(TypeExpr):
    items: list[TypeExpr]


@dataclass
class TRecordT(TypeExpr):
    fields: list[tuple[str, TypeExpr]]


# ------------------------------------------------------------- patterns

@dataclass
class Pattern:
    pos: Pos = field(default_factory=Pos, kw_only=True)


@dataclass
class PWild(Pattern):
    pass


@dataclass
class PBind(Pattern):
    name: str


@dataclass
class PCtor(Pattern):
    name: str
    args: list[Pattern] = field(default_factory=list)
    parens: bool = False       # written with (), even if empty


# ---------------------------------------------------------- expressions

@dataclass
class Expr:
    pos: Pos = field(default_factory=Pos, kw_only=True)


@dataclass
class EInt(Expr):
    value: int


@dataclass
class EBool(Expr):
    value: bool


@dataclass
class EStr(Expr):
    value: str


@dataclass
class EName(Expr):
    name: str


@dataclass
class ECall(Expr):
    name: str
    args: list[Expr]
    method_receiver: bool = False  # written receiver.name(...) style


@dataclass
class ELambda(Expr):
    params: list[str]
    body: Expr


@dataclass
class EIf(Expr):
    cond: Expr
    then: Expr
    otherwise: Expr


@dataclass
class ELet(Expr):
    name: str
    value: Expr
    body: Expr
    type: TypeExpr | None = None


@dataclass
class ENondet(Expr):
    name: str
    choices: Expr   # the oneOf(...) call
    body: Expr


@dataclass
class EMatch(Expr):
    scrutinee: Expr
    arms: list[tuple[Pattern, Expr]]


@dataclass
class ERecord(Expr):
    fields: list[tuple[str, Expr]]


@dataclass
class ERecordUpdate(Expr):
    base: Expr
    fields: list[tuple[str, Expr]]


@dataclass
class ETuple(Expr):
    items: list[Expr]


@dataclass
class EList(Expr):
    items: list[Expr]


@dataclass
class ESet(Expr):
    items: list[Expr]


@dataclass
class EMap(Expr):
    pairs: list[tuple[Expr, Expr]]


@dataclass
class EField(Expr):
    base: Expr
    name: str


@dataclass
class ETupleGet(Expr):
    base: Expr
    index: int   # 1-based, from ._1 style access


@dataclass
class EIndex(Expr):
    base: Expr
    index: Expr


@dataclass
class EUnop(Expr):
    op: str      # "not" | "-"
    operand: Expr


@dataclass
class EBinop(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class EPrime(Expr):
    var: str
    value: Expr


@dataclass
class EAll(Expr):
    items: list[Expr]


@dataclass
class EAny(Expr):
    items: list[Expr]


# --------------------------------------------------------- declarations

@dataclass
class Decl:
    pos: Pos = field(default_factory=Pos, kw_only=True)
    span: tuple[int, int] = field(default=(0, 0), kw_only=True)  # [start, end) source offsets


@dataclass
class DImport(Decl):
    module: str
    path: str


@dataclass
class DTypeAlias(Decl):
    name: str
    target: TypeExpr


@dataclass
class DSumType(Decl):
    name: str
    ctors: list[tuple[str, TypeExpr | None]]


@dataclass
class DVar(Decl):
    name: str
    type: TypeExpr


@dataclass
class DVal(Decl):
    name: str
    type: TypeExpr | None
    value: Expr
    pure: bool = True


@dataclass
class DDef(Decl):
    name: str
    params: list[tuple[str, TypeExpr]]
    ret: TypeExpr | None
    body: Expr
    kind: str = "pure"       # "pure" | "action"
    has_parens: bool = True  # actions may omit the parameter list


@dataclass
class Module:
    name: str
    decls: list[Decl]
    source: str = ""
    file: str = "<model>"

    def defs(self) -> list[DDef]:
        return [d for d in self.decls if isinstance(d, DDef)]

    def get_def(self, name: str) -> DDef | None:
        for d in self.decls:
            if isinstance(d, DDef) and d.name == name:
                return d
        return None


_IGNORED_FIELDS = {"pos", "span", "source", "file"}


def ast_equal(a: object, b: object) -> bool:
    """Structural equality ignoring source positions and raw text."""
    if type(a) is not type(b):
        return False
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    if hasattr(a, "__dataclass_fields__"):
        for name in a.__dataclass_fields__:
            if name in _IGNORED_FIELDS:
                continue
            if not ast_equal(getattr(a, name), getattr(b, name)):
                return False
        return True
    return a == b
