"""Runtime values for the kernel evaluator.

Maps and sets keep entries under a canonical key so equality, ordering,
and rendering are independent of insertion order. Integers are
unbounded. values_equal is structural: records compare by field set,
maps by key set, never by construction order.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class Value:
    pass


@dataclass(frozen=True)
class VInt(Value):
    n: int


@dataclass(frozen=True)
class VBool(Value):
    b: bool


@dataclass(frozen=True)
class VStr(Value):
    s: str


@dataclass
class VList(Value):
    items: list[Value]


@dataclass
class VTuple(Value):
    items: list[Value]


@dataclass
class VRecord(Value):
    fields: dict[str, Value]


@dataclass
class VSet(Value):
    # canonical key -> member
    members: dict[tuple, Value] = field(default_factory=dict)


@dataclass
class VMap(Value):
    # canonical key of the map key -> (key, value)
    entries: dict[tuple, tuple[Value, Value]] = field(default_factory=dict)


@dataclass
class VVariant(Value):
    name: str
    payload: Value | None = None


@dataclass
class VLambda(Value):
    params: list[str]
    body: object           # syntax.Expr
    env: object            # evaluator environment


def canon(v: Value) -> tuple:
    """Canonical comparable/hashable form; also the documented fold order."""
    if isinstance(v, VBool):
        return ("bool", v.b)
    if isinstance(v, VInt):
        return ("int", v.n)
    if isinstance(v, VStr):
        return ("str", v.s)
    if isinstance(v, VList):
        return ("list", tuple(canon(x) for x in v.items))
    if isinstance(v, VTuple):
        return ("tup", tuple(canon(x) for x in v.items))
    if isinstance(v, VRecord):
        return ("rec", tuple(sorted((k, canon(x)) for k, x in v.fields.items())))
    if isinstance(v, VMap):
        return ("map", tuple(sorted((k, canon(val)) for k, (_, val) in v.entries.items())))
    if isinstance(v, VSet):
        return ("set", tuple(sorted(v.members.keys())))
    if isinstance(v, VVariant):
        return ("variant", v.name, canon(v.payload) if v.payload is not None else None)
    raise TypeError(f"cannot canonicalize {v!r}")


def values_equal(a: Value, b: Value) -> bool:
    """Structural equality used by semantic checks and trace comparison."""
    return canon(a) == canon(b)


def mk_set(items: list[Value]) -> VSet:
    return VSet({canon(x): x for x in items})


def mk_map(pairs: list[tuple[Value, Value]]) -> VMap:
    return VMap({canon(k): (k, v) for k, v in pairs})


def set_members(s: VSet) -> list[Value]:
    return [s.members[k] for k in sorted(s.members.keys())]


def map_entries(m: VMap) -> list[tuple[Value, Value]]:
    return [m.entries[k] for k in sorted(m.entries.keys())]


def _quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def render_value(v: Value) -> str:
    """Render a value as a source expression the parser accepts back."""
    if isinstance(v, VInt):
        return str(v.n)
    if isinstance(v, VBool):
        return "true" if v.b else "false"
    if isinstance(v, VStr):
        return _quote(v.s)
    if isinstance(v, VList):
        return f"[{', '.join(render_value(x) for x in v.items)}]"
    if isinstance(v, VTuple):
        return f"({', '.join(render_value(x) for x in v.items)})"
    if isinstance(v, VRecord):
        if not v.fields:
            return "{}"
        inner = ", ".join(f"{k}: {render_value(x)}" for k, x in v.fields.items())
        return f"{{ {inner} }}"
    if isinstance(v, VSet):
        return f"Set({', '.join(render_value(x) for x in set_members(v))})"
    if isinstance(v, VMap):
        pairs = ", ".join(f"{render_value(k)} -> {render_value(val)}"
                          for k, val in map_entries(v))
        return f"Map({pairs})"
    if isinstance(v, VVariant):
        if v.payload is None:
            return v.name
        return f"{v.name}({render_value(v.payload)})"
    raise TypeError(f"cannot render {v!r}")


def value_to_jsonable(v: Value):
    """Encode for trace files. Records are plain objects; container kinds
    that JSON cannot express natively get #-tagged wrappers."""
    if isinstance(v, VInt):
        return v.n
    if isinstance(v, VBool):
        return v.b
    if isinstance(v, VStr):
        return v.s
    if isinstance(v, VList):
        return [value_to_jsonable(x) for x in v.items]
    if isinstance(v, VTuple):
        return {"#tup": [value_to_jsonable(x) for x in v.items]}
    if isinstance(v, VRecord):
        return {k: value_to_jsonable(x) for k, x in v.fields.items()}
    if isinstance(v, VSet):
        return {"#set": [value_to_jsonable(x) for x in set_members(v)]}
    if isinstance(v, VMap):
        return {"#map": [[value_to_jsonable(k), value_to_jsonable(val)]
                         for k, val in map_entries(v)]}
    if isinstance(v, VVariant):
        if v.payload is None:
            return {"#variant": v.name}
        return {"#variant": v.name, "payload": value_to_jsonable(v.payload)}
    raise TypeError(f"cannot encode {v!r}")


def value_from_jsonable(obj) -> Value:
    if isinstance(obj, bool):
        return VBool(obj)
    if isinstance(obj, int):
        return VInt(obj)
    if isinstance(obj, str):
        return VStr(obj)
    if isinstance(obj, list):
        return VList([value_from_jsonable(x) for x in obj])
    if isinstance(obj, dict):
        if "#tup" in obj:
            return VTuple([value_from_jsonable(x) for x in obj["#tup"]])
        if "#set" in obj:
            return mk_set([value_from_jsonable(x) for x in obj["#set"]])
        if "#map" in obj:
            return mk_map([(value_from_jsonable(k), value_from_jsonable(v))
                           for k, v in obj["#map"]])
        if "#variant" in obj:
            payload = obj.get("payload")
            return VVariant(obj["#variant"],
                            value_from_jsonable(payload) if "payload" in obj else None)
        return VRecord({k: value_from_jsonable(v) for k, v in obj.items()})
    raise TypeError(f"cannot decode {obj!r}")
