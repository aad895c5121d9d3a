"""Contract-source frontend.

Scans a restricted subset of the contract implementation language:
top-level use/const/struct/enum/fn items plus type aliases. impl, trait,
and mod blocks are skipped wholesale (brace-matched); attributes and
macro invocations are ignored. No macro expansion, no trait resolution,
no cross-crate name resolution: storage-library calls are resolved by
import lines plus path-suffix matching, which is a documented
approximation of full compiler name resolution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

STORAGE_LIB = "cw_storage_plus"
INT_TYPES = {"u8", "u16", "u32", "u64", "u128", "Uint128", "Uint64",
             "i32", "i64"}
DEPS_FAMILY = {"Deps", "DepsMut"}
MESSAGE_ENUMS = {"InstantiateMsg", "ExecuteMsg", "QueryMsg", "MigrateMsg"}


class SubsetViolation(Exception):
    def __init__(self, location: str, construct: str):
        super().__init__(f"{location}: unsupported construct: {construct}")
        self.location = location
        self.construct = construct


class UnmappableType(Exception):
    pass


class DuplicateHandler(Exception):
    pass


class HandlerNotFound(Exception):
    pass


# ---------------------------------------------------------------- rust types

@dataclass
class RustType:
    """Path-based type: last segment name plus generic arguments."""
    name: str
    args: list["RustType"] = field(default_factory=list)
    tuple_items: list["RustType"] | None = None

    def render(self) -> str:
        if self.tuple_items is not None:
            return "(" + ", ".join(t.render() for t in self.tuple_items) + ")"
        if self.args:
            return f"{self.name}<{', '.join(a.render() for a in self.args)}>"
        return self.name


def parse_rust_type(text: str) -> RustType:
    ty, rest = _parse_ty(text.strip())
    if rest.strip():
        raise UnmappableType(f"trailing input in type: {text!r}")
    return ty


def _parse_ty(s: str) -> tuple[RustType, str]:
    s = s.lstrip()
    while s.startswith("&"):
        s = s[1:].lstrip()
        if s.startswith("mut "):
            s = s[4:].lstrip()
        if s.startswith("'"):  # lifetime
            s = re.sub(r"^'\w+\s*", "", s)
    if s.startswith("("):
        items: list[RustType] = []
        s = s[1:]
        while True:
            s = s.lstrip()
            if s.startswith(")"):
                s = s[1:]
                break
            ty, s = _parse_ty(s)
            items.append(ty)
            s = s.lstrip()
            if s.startswith(","):
                s = s[1:]
            elif not s.startswith(")"):
                raise UnmappableType(f"bad tuple type near {s!r}")
        return RustType("(tuple)", tuple_items=items), s
    m = re.match(r"(?:dyn |impl |fn\b)", s)
    if m:
        raise UnmappableType(f"unsupported type construct: {s!r}")
    m = re.match(r"[A-Za-z_][A-Za-z0-9_]*(?:::[A-Za-z_][A-Za-z0-9_]*)*", s)
    if not m:
        raise UnmappableType(f"cannot parse type: {s!r}")
    path = m.group(0)
    s = s[m.end():].lstrip()
    name = path.rsplit("::", 1)[-1]
    args: list[RustType] = []
    if s.startswith("<"):
        s = s[1:]
        while True:
            s = s.lstrip()
            if s.startswith(">"):
                s = s[1:]
                break
            ty, s = _parse_ty(s)
            args.append(ty)
            s = s.lstrip()
            if s.startswith(","):
                s = s[1:]
            elif not s.startswith(">"):
                raise UnmappableType(f"bad generic args near {s!r}")
    ty = RustType(name, args)
    ty.path = path  # full path kept for storage-library resolution
    return ty, s


# ---------------------------------------------------------------- model types

@dataclass
class ModelType:
    """Rendered model-side type plus the opaque names it leans on."""
    text: str
    opaque: list[str] = field(default_factory=list)


def map_type(source_type: RustType | str) -> ModelType:
    """Fixed mapping from the contract type subset to model types."""
    ty = parse_rust_type(source_type) if isinstance(source_type, str) else source_type
    if ty.tuple_items is not None:
        parts = [map_type(t) for t in ty.tuple_items]
        return ModelType("(" + ", ".join(p.text for p in parts) + ")",
                         [o for p in parts for o in p.opaque])
    n = ty.name
    if n in INT_TYPES:
        return ModelType("int")
    if n == "bool":
        return ModelType("bool")
    if n in ("String", "str", "Addr"):
        return ModelType("str" if n != "Addr" else "Addr")
    if n == "Vec":
        inner = map_type(ty.args[0])
        return ModelType(f"List[{inner.text}]", inner.opaque)
    if n == "Option":
        inner = map_type(ty.args[0])
        return ModelType(f"Option[{inner.text}]", inner.opaque)
    if n in ("Map", "HashMap", "BTreeMap"):
        if len(ty.args) != 2:
            raise UnmappableType(f"{n} needs two type arguments")
        k, v = map_type(ty.args[0]), map_type(ty.args[1])
        return ModelType(f"({k.text} -> {v.text})", k.opaque + v.opaque)
    if n == "Item":
        return map_type(ty.args[0])
    if ty.args:
        raise UnmappableType(f"generic type {ty.render()} outside the table")
    # Unknown simple names pass through as opaque references.
    return ModelType(n, [n])


# ------------------------------------------------------------------- lexing

_TOKEN_RE = re.compile(r"""
    (?P<doc>///[^\n]*)
  | (?P<line>//[^\n]*)
  | (?P<block>/\*)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<char>'(?:[^'\\]|\\.)')
  | (?P<lifetime>'[A-Za-z_]\w*)
  | (?P<num>\d[\w]*)
  | (?P<id>[A-Za-z_]\w*)
  | (?P<punct>::|->|=>|\#!?\[|[{}()\[\]<>,;:=&|!+\-*/%.@?])
  | (?P<ws>\s+)
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    offset: int
    line: int


def _lex(text: str, path: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line = 0, 1
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise SubsetViolation(f"{path}:{line}", f"unreadable input {text[i:i+10]!r}")
        kind = m.lastgroup
        lexeme = m.group(0)
        if kind == "block":
            depth, j = 1, m.end()
            while depth and j < n:
                if text.startswith("/*", j):
                    depth += 1
                    j += 2
                elif text.startswith("*/", j):
                    depth -= 1
                    j += 2
                else:
                    j += 1
            line += text.count("\n", i, j)
            i = j
            continue
        if kind not in ("ws", "line"):
            toks.append(Tok(kind, lexeme, i, line))
        line += lexeme.count("\n")
        i = m.end()
    toks.append(Tok("eof", "", n, line))
    return toks


# --------------------------------------------------------------------- items

@dataclass
class UseDecl:
    path: str           # e.g. "cw_storage_plus::Item"
    alias: str          # local name, e.g. "Item"


@dataclass
class ConstDecl:
    name: str
    type_text: str
    init_text: str
    file: str
    line: int
    is_pub: bool


@dataclass
class StructDecl:
    name: str
    fields: list[tuple[str, str]]     # (field name, type text)
    file: str
    line: int


@dataclass
class EnumDecl:
    name: str
    variants: list[tuple[str, list[tuple[str, str]] | str | None]]
    # payload: None (unit) | type text (tuple of one) | field list (struct-like)
    file: str
    line: int


@dataclass
class FnDecl:
    name: str
    params: list[tuple[str, str]]     # (param name, type text)
    ret_text: str
    is_pub: bool
    file: str
    line: int
    source: str                        # byte-exact text starting at `pub fn`/`fn`
    doc: list[str]


@dataclass
class StateItem:
    name: str            # lower-cased constant identifier
    kind: str            # "SingleItem" | "KeyedMap"
    storage_key: str
    value_type: ModelType
    key_type: ModelType | None = None
    const_name: str = ""


@dataclass
class HandlerSig:
    name: str
    params: list[tuple[str, str, ModelType | None]]  # (name, source type, mapped or None for Deps-family)
    mutability: str      # "Mutating" | "ReadOnly" | "Pure"
    file: str
    source: str
    doc: list[str]


@dataclass
class ContractIR:
    name: str
    uses: list[UseDecl] = field(default_factory=list)
    constants: list[ConstDecl] = field(default_factory=list)
    structs: list[StructDecl] = field(default_factory=list)
    enums: list[EnumDecl] = field(default_factory=list)
    fns: list[FnDecl] = field(default_factory=list)
    state_items: list[StateItem] = field(default_factory=list)
    handlers: list[HandlerSig] = field(default_factory=list)
    messages: dict[str, EnumDecl] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


@dataclass
class SourceUnit:
    path: str
    text: str


class _ItemScanner:
    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.toks = _lex(unit.text, unit.path)
        self.i = 0

    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def loc(self, t: Tok) -> str:
        return f"{self.unit.path}:{t.line}"

    def skip_attr(self) -> None:
        # '#[' or '#![' already seen; consume to matching ']'
        depth = 1
        while depth and self.peek().kind != "eof":
            t = self.next()
            if t.text in ("[", "#[", "#!["):
                depth += 1 if t.text == "[" else 0
            elif t.text == "]":
                depth -= 1

    def skip_braced(self) -> None:
        while self.peek().kind != "eof" and self.peek().text != "{":
            if self.peek().text == ";":   # e.g. `mod name;`
                self.next()
                return
            self.next()
        depth = 0
        while self.peek().kind != "eof":
            t = self.next()
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    return

    def text_until(self, *stops: str, angles: bool = True) -> str:
        """Raw source text up to an unnested stop token (not consumed).

        Angle brackets are depth-tracked only in type position; in
        expression position `<` is a comparison, not a bracket.
        """
        start = self.peek().offset
        depth = 0
        openers = "([{<" if angles else "([{"
        closers = ")]}>" if angles else ")]}"
        while self.peek().kind != "eof":
            t = self.peek()
            if depth == 0 and t.text in stops:
                break
            if t.text in openers:
                depth += 1
            elif t.text in closers:
                depth -= 1
            self.next()
        return self.unit.text[start:self.peek().offset].strip()

    # ------------------------------------------------------------- scanning

    def scan(self, ir: ContractIR) -> None:
        doc: list[str] = []
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "doc":
                doc.append(t.text)
                self.next()
                continue
            if t.text in ("#[", "#!["):
                self.next()
                self.skip_attr()
                continue
            is_pub = False
            item_start = t.offset
            if t.kind == "id" and t.text == "pub":
                is_pub = True
                self.next()
                if self.peek().text == "(":   # pub(crate) etc.
                    while self.next().text != ")":
                        pass
                t = self.peek()
            kw = t.text if t.kind == "id" else ""
            if kw == "use":
                self.next()
                self.parse_use(ir)
            elif kw == "const":
                self.next()
                self.parse_const(ir, is_pub)
            elif kw == "struct":
                self.next()
                self.parse_struct(ir)
            elif kw == "enum":
                self.next()
                self.parse_enum(ir)
            elif kw == "type":
                self.next()
                self.text_until(";")
                self.next()   # alias declarations are skipped, not modeled
            elif kw == "fn":
                self.parse_fn(ir, is_pub, doc, item_start)
            elif kw in ("impl", "trait", "mod", "unsafe", "extern", "macro_rules"):
                self.skip_braced()
            else:
                raise SubsetViolation(self.loc(t), t.text or t.kind)
            doc = []

    def parse_use(self, ir: ContractIR) -> None:
        # use a::b::{C, D as E};  |  use a::b::C;  |  use a::b::*;
        prefix_parts: list[str] = []
        while True:
            t = self.next()
            if t.kind == "id":
                prefix_parts.append(t.text)
            elif t.text == "::":
                continue
            elif t.text == "{":
                while self.peek().text != "}":
                    inner: list[str] = []
                    while self.peek().kind == "id" or self.peek().text == "::":
                        tok = self.next()
                        if tok.kind == "id":
                            inner.append(tok.text)
                    if not inner:
                        raise SubsetViolation(self.loc(self.peek()),
                                              "nested import group")
                    alias = inner[-1]
                    if len(inner) >= 2 and inner[-2] == "as":
                        alias = inner[-1]
                        inner = inner[:-2]
                    full = "::".join(prefix_parts + inner)
                    ir.uses.append(UseDecl(full, alias))
                    if self.peek().text == ",":
                        self.next()
                self.next()  # }
                self.next()  # ;
                return
            elif t.text == "*":
                ir.uses.append(UseDecl("::".join(prefix_parts) + "::*", "*"))
            elif t.text == ";":
                if prefix_parts:
                    alias = prefix_parts[-1]
                    if len(prefix_parts) >= 2 and prefix_parts[-2] == "as":
                        alias = prefix_parts[-1]
                        prefix_parts = prefix_parts[:-2] + [alias]
                        full = "::".join(prefix_parts[:-1])
                    else:
                        full = "::".join(prefix_parts)
                    ir.uses.append(UseDecl(full, alias))
                return

    def parse_const(self, ir: ContractIR, is_pub: bool) -> None:
        name_tok = self.next()
        self.next()  # :
        type_text = self.text_until("=")
        self.next()  # =
        init_text = self.text_until(";", angles=False)
        self.next()  # ;
        ir.constants.append(ConstDecl(name_tok.text, type_text, init_text,
                                      self.unit.path, name_tok.line, is_pub))

    def parse_struct(self, ir: ContractIR) -> None:
        name_tok = self.next()
        if self.peek().text == "<":
            raise SubsetViolation(self.loc(name_tok), "generic struct")
        fields: list[tuple[str, str]] = []
        if self.peek().text == ";":
            self.next()
        elif self.peek().text == "{":
            self.next()
            while self.peek().text != "}":
                if self.peek().text in ("#[", "#!["):
                    self.next()
                    self.skip_attr()
                    continue
                if self.peek().kind == "doc":
                    self.next()
                    continue
                if self.peek().text == "pub":
                    self.next()
                fname = self.next().text
                self.next()  # :
                ftype = self.text_until(",", "}")
                fields.append((fname, ftype))
                if self.peek().text == ",":
                    self.next()
            self.next()
        else:
            raise SubsetViolation(self.loc(name_tok), "tuple struct")
        ir.structs.append(StructDecl(name_tok.text, fields,
                                     self.unit.path, name_tok.line))

    def parse_enum(self, ir: ContractIR) -> None:
        name_tok = self.next()
        self.next()  # {
        variants: list[tuple[str, object]] = []
        while self.peek().text != "}":
            if self.peek().text in ("#[", "#!["):
                self.next()
                self.skip_attr()
                continue
            if self.peek().kind == "doc":
                self.next()
                continue
            vname = self.next().text
            payload: object = None
            if self.peek().text == "(":
                self.next()
                payload = self.text_until(")")
                self.next()
            elif self.peek().text == "{":
                self.next()
                fields: list[tuple[str, str]] = []
                while self.peek().text != "}":
                    if self.peek().kind == "doc":
                        self.next()
                        continue
                    fname = self.next().text
                    self.next()  # :
                    ftype = self.text_until(",", "}")
                    fields.append((fname, ftype))
                    if self.peek().text == ",":
                        self.next()
                self.next()
                payload = fields
            variants.append((vname, payload))
            if self.peek().text == ",":
                self.next()
        self.next()
        decl = EnumDecl(name_tok.text, variants, self.unit.path, name_tok.line)
        if decl.name in MESSAGE_ENUMS:
            ir.messages[decl.name] = decl
        else:
            ir.enums.append(decl)

    def parse_fn(self, ir: ContractIR, is_pub: bool, doc: list[str],
                 pub_offset: int) -> None:
        start = pub_offset if is_pub else self.peek().offset
        self.next()  # fn
        name_tok = self.next()
        if self.peek().text == "<":
            raise SubsetViolation(self.loc(name_tok), "generic function")
        self.next()  # (
        params: list[tuple[str, str]] = []
        while self.peek().text != ")":
            if self.peek().text == "mut":
                self.next()
            pname = self.next().text
            self.next()  # :
            ptype = self.text_until(",", ")")
            params.append((pname, ptype))
            if self.peek().text == ",":
                self.next()
        self.next()  # )
        ret_text = ""
        if self.peek().text == "->":
            self.next()
            ret_text = self.text_until("{")
        depth = 0
        end = self.peek().offset
        while self.peek().kind != "eof":
            t = self.next()
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    end = t.offset + 1
                    break
        ir.fns.append(FnDecl(name_tok.text, params, ret_text, is_pub,
                             self.unit.path, name_tok.line,
                             self.unit.text[start:end], doc))


# --------------------------------------------------------------- public API

def parse_project(sources: list[SourceUnit], name: str = "contract") -> ContractIR:
    if not sources:
        raise SubsetViolation("<project>", "no source files")
    ir = ContractIR(name=name)
    for unit in sources:
        _ItemScanner(unit).scan(ir)
    seen: dict[str, str] = {}
    for fn in ir.fns:
        if fn.is_pub:
            if fn.name in seen:
                raise DuplicateHandler(
                    f"handler {fn.name} defined in both {seen[fn.name]} and {fn.file}")
            seen[fn.name] = fn.file
    ir.state_items = find_state_items(ir)
    ir.handlers = classify_handlers(ir)
    return ir


def load_project(root: str | Path) -> tuple[ContractIR, dict]:
    """Read a contract project directory into an IR.

    An optional project.json may carry {"name", "entry_files"}. Without
    it, every .rs file under src/ (or the root) is read in lexicographic
    path order.
    """
    import json

    root = Path(root)
    config: dict = {}
    cfg_path = root / "project.json"
    if cfg_path.exists():
        config = json.loads(cfg_path.read_text())
    if "entry_files" in config:
        files = [root / f for f in config["entry_files"]]
    else:
        base = root / "src" if (root / "src").is_dir() else root
        files = sorted(base.rglob("*.rs"))
    units = [SourceUnit(str(f.relative_to(root)), f.read_text()) for f in files]
    name = config.get("name", root.name)
    return parse_project(units, name=name), config


def _storage_callee(ir: ContractIR, init_text: str) -> str | None:
    """Resolve an initializer call's target to a storage-library
    definition name ("Item::new"/"Map::new"), or None."""
    m = re.match(r"\s*([A-Za-z_][\w]*(?:\s*::\s*[A-Za-z_][\w]*)*)\s*\(", init_text)
    if not m:
        return None  # condition 1: body must be a call
    path = [p.strip() for p in m.group(1).split("::")]
    if len(path) < 2 or path[-1] != "new":
        return None
    head, kind = path[0], path[-2]
    if len(path) >= 3 and path[0] == STORAGE_LIB:
        resolved_from, kind = STORAGE_LIB, path[-2]
    else:
        # Exact import of the head name wins over any glob import.
        resolved_from = None
        for u in ir.uses:
            target = u.path.split("::")
            if u.alias == head and len(target) >= 2:
                resolved_from = target[0]
                kind = target[-1]
                break
        if resolved_from is None:
            for u in ir.uses:
                if u.alias == "*" and u.path.split("::")[0] == STORAGE_LIB:
                    resolved_from = STORAGE_LIB
                    break
    if resolved_from != STORAGE_LIB:
        return None  # condition 2: definition must come from the storage library
    if kind not in ("Item", "Map"):
        return None  # condition 3: must be Item::new or Map::new
    return f"{kind}::new"


def _storage_key(init_text: str) -> str:
    m = re.search(r'"((?:[^"\\]|\\.)*)"', init_text)
    return m.group(1) if m else ""


def find_state_items(ir: ContractIR) -> list[StateItem]:
    items: list[StateItem] = []
    for c in ir.constants:
        callee = _storage_callee(ir, c.init_text)
        if callee is None:
            continue
        ty = parse_rust_type(c.type_text)
        if callee == "Item::new" and len(ty.args) >= 1:
            items.append(StateItem(c.name.lower(), "SingleItem",
                                   _storage_key(c.init_text),
                                   map_type(ty.args[0]), None, c.name))
        elif callee == "Map::new" and len(ty.args) >= 2:
            items.append(StateItem(c.name.lower(), "KeyedMap",
                                   _storage_key(c.init_text),
                                   map_type(ty.args[1]),
                                   map_type(ty.args[0]), c.name))
    return items


def classify_handlers(ir: ContractIR) -> list[HandlerSig]:
    handlers: list[HandlerSig] = []
    for fn in ir.fns:
        if not fn.is_pub:
            continue
        mutability = "Pure"
        params: list[tuple[str, str, ModelType | None]] = []
        for pname, ptype in fn.params:
            base = parse_rust_type(ptype).name
            if base == "DepsMut":
                mutability = "Mutating"
                params.append((pname, ptype, None))
            elif base == "Deps":
                if mutability != "Mutating":
                    mutability = "ReadOnly"
                params.append((pname, ptype, None))
            else:
                params.append((pname, ptype, map_type(ptype)))
        handlers.append(HandlerSig(fn.name, params, mutability,
                                   fn.file, fn.source, fn.doc))
    return handlers


def extract_handler_source(ir: ContractIR, name: str) -> str:
    for h in ir.handlers:
        if h.name == name:
            return h.source
    raise HandlerNotFound(name)
