"""Deterministic model and adapter emission from a ContractIR.

Everything here is pure text generation: same IR and config in,
byte-identical documents out. The emitted model is self-contained (no
imports), parses and typechecks in the kernel with stub bodies in
place, and mirrors the step semantics the trace simulator implements.

Conventions:
- ContractState fields are the lower-cased state constants, in source
  declaration order.
- Each mutating handler gets one stub, one message variant named
  ExecuteMsg_<CamelCase>, and one action; `instantiate` is special-cased
  as the forced first step and stays out of ExecuteMsg.
- Declared message enums in the source are recorded in the IR but the
  emitted dispatch derives variants from the handlers themselves, so
  the model never dispatches to a handler that does not exist.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .frontend import ContractIR, HandlerSig, StateItem

TRACE_SCHEMA_VERSION = "1"

# The init action funds every address with MAX_AMOUNT of every denom.  The
# simulator evaluates this same expression, so the two cannot drift.
INIT_BANK_EXPR = ("ADDRESSES.fold(Map(), (b, a) => b.put(a, "
                  "DENOMS.fold(Map(), (m, d) => m.put(d, MAX_AMOUNT))))")

DEFAULT_CONFIG = {
    "addresses": ["admin", "sender1", "sender2", "sender3", "contract0"],
    "denoms": ["uawesome", "d1"],
    "max_amount": 200,
    "contract_address": "contract0",
    "default_denom": "uawesome",
}

RESERVED_VALS = {"ADDRESSES", "DENOMS", "MAX_AMOUNT", "CONTRACT_ADDRESS",
                 "DENOM", "Response_new", "init_contract_state"}

# Already provided by the prelude; contract declarations with these names
# are modeled by the built-in definitions instead of being re-emitted.
PRELUDE_TYPE_NAMES = {"Addr", "Coin", "MessageInfo", "Env", "Bank", "Deps",
                      "AttrValue", "Attribute", "BankMsg", "CosmosMsg",
                      "Response", "ContractError"}
MESSAGE_TYPE_NAMES = {"InstantiateMsg", "ExecuteMsg", "QueryMsg", "MigrateMsg"}

STUB_BODY = "  // TODO: Update body\n  (Ok(Response_new), state)"
ADAPTER_PLACEHOLDER = "// TODO: Query the contract and compare the state as you wish"


class StubberError(Exception):
    pass


@dataclass
class TypeDef:
    name: str
    text: str
    refs: list[str]


@dataclass
class PureDef:
    name: str
    params: list[tuple[str, str]]
    return_type: str
    body: str
    is_stub: bool = False

    @property
    def text(self) -> str:
        params = ", ".join(f"{n}: {t}" for n, t in self.params)
        return (f"pure def {self.name}({params}): {self.return_type} = {{\n"
                f"{self.body}\n}}")


@dataclass
class ActionDef:
    name: str
    text: str


@dataclass
class PickSpec:
    """One nondeterministic choice; shared by emission and simulation."""
    name: str
    kind: str            # int_range | addr | bool | list_int | list_addr
    #                      opt_int | opt_addr | default
    default_text: str = ""


@dataclass
class ModelDocument:
    module_name: str
    type_defs: list[TypeDef]
    state_vars: list[tuple[str, str]]
    pure_defs: list[PureDef]
    actions: list[ActionDef]
    init_value: str
    text: str
    stubs: dict[str, PureDef]
    handler_picks: dict[str, list[PickSpec]]
    message_variants: dict[str, str]     # handler name -> variant name
    constants: list[str]                 # pure val lines available to stubs
    notes: list[str]
    config: dict


@dataclass
class AdapterDocument:
    test_source: str
    compare_state_span: tuple[int, int]
    trace_schema_version: str = TRACE_SCHEMA_VERSION


def camel(name: str) -> str:
    return "".join(p.capitalize() for p in name.split("_") if p)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ----------------------------------------------------------------- type env

def _collect_type_defs(ir: ContractIR, notes: list[str]) -> tuple[list[TypeDef], dict]:
    """Contract structs and enums as model type definitions, plus opaque
    aliases for external names, in dependency-safe declaration order."""
    env: dict[str, object] = {}
    defs: list[TypeDef] = []
    known = ({s.name for s in ir.structs} | {e.name for e in ir.enums}
             | PRELUDE_TYPE_NAMES)
    opaque_needed: list[str] = []

    def emittable(name: str) -> bool:
        if name in PRELUDE_TYPE_NAMES:
            notes.append(f"type {name} is modeled by the built-in {name} definition")
            return False
        if name in MESSAGE_TYPE_NAMES:
            notes.append(f"message type {name} is superseded by the derived "
                         "execute dispatch")
            return False
        return True

    def note_opaque(names: list[str]) -> None:
        for n in names:
            if n not in known and n not in opaque_needed:
                opaque_needed.append(n)

    from .frontend import map_type

    for s in ir.structs:
        if not emittable(s.name):
            continue
        fields = []
        for fname, ftext in s.fields:
            mt = map_type(ftext)
            note_opaque(mt.opaque)
            fields.append((fname, mt.text))
        body = ",\n".join(f"  {n}: {_strip_parens(t)}" for n, t in fields)
        text = f"type {s.name} = {{\n{body}\n}}" if fields else f"type {s.name} = {{ }}"
        refs = [r for _, t in fields for r in type_name_refs(t)]
        defs.append(TypeDef(s.name, text, refs))
        env[s.name] = ("record", fields)

    for e in ir.enums:
        if not emittable(e.name):
            continue
        ctors = []
        refs: list[str] = []
        for vname, payload in e.variants:
            cname = f"{e.name}_{vname}"
            if payload is None or payload == [] or payload == "":
                ctors.append((cname, None))
            elif isinstance(payload, str):
                parts = [p.strip() for p in _split_top(payload)]
                mts = [map_type(p) for p in parts]
                for mt in mts:
                    note_opaque(mt.opaque)
                    refs.extend(type_name_refs(mt.text))
                ptext = mts[0].text if len(mts) == 1 else \
                    "(" + ", ".join(m.text for m in mts) + ")"
                ctors.append((cname, ptext))
            else:
                fs = []
                for fname, ftext in payload:
                    mt = map_type(ftext)
                    note_opaque(mt.opaque)
                    refs.extend(type_name_refs(mt.text))
                    fs.append(f"{fname}: {_strip_parens(mt.text)}")
                ctors.append((cname, "{ " + ", ".join(fs) + " }"))
        body = " | ".join(c if p is None else f"{c}({p})" for c, p in ctors)
        defs.append(TypeDef(e.name, f"type {e.name} = {body}", refs))
        env[e.name] = ("sum", ctors)

    alias_defs: list[TypeDef] = []
    for name in opaque_needed:
        notes.append(f"type {name} is external; modeled as str, requires cleanup")
        alias_defs.append(TypeDef(
            name, f"type {name} = str // external type, requires cleanup", []))
        env[name] = ("alias-str", None)
    return alias_defs + defs, env


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    return parts


def _strip_parens(t: str) -> str:
    return t[1:-1] if t.startswith("(") and t.endswith(")") and " -> " in t else t


_NAME_RE = re.compile(r"\b([A-Z][A-Za-z0-9_]*)\b")


def type_name_refs(type_text: str) -> list[str]:
    return [n for n in _NAME_RE.findall(type_text)
            if n not in ("List", "Set", "Option", "Result")]


# ----------------------------------------------------------- default values

def default_value(type_text: str, env: dict, depth: int = 0) -> str:
    if depth > 20:
        raise StubberError(f"type too deep for a default: {type_text}")
    t = type_text.strip()
    if t.startswith("(") and t.endswith(")"):
        inner = t[1:-1]
        if " -> " in inner and len(_split_top(inner)) == 1:
            return "Map()"
        parts = _split_top(inner)
        if len(parts) > 1:
            return "(" + ", ".join(default_value(p, env, depth + 1) for p in parts) + ")"
        return default_value(inner, env, depth + 1)
    if " -> " in t:
        return "Map()"
    if t == "int":
        return "0"
    if t == "bool":
        return "false"
    if t in ("str", "Addr"):
        return '""'
    if t.startswith("List["):
        return "[]"
    if t.startswith("Option["):
        return "None"
    if t.startswith("Set["):
        return "Set()"
    if t.startswith("{"):
        fields = _split_top(t.strip("{} "))
        out = []
        for f in fields:
            if not f.strip():
                continue
            fname, ftype = f.split(":", 1)
            out.append(f"{fname.strip()}: {default_value(ftype, env, depth + 1)}")
        return "{ " + ", ".join(out) + " }"
    entry = env.get(t)
    if entry is None:
        raise StubberError(f"no default for unknown type {t}")
    kind, payload = entry
    if kind == "alias-str":
        return '""'
    if kind == "record":
        fields = ", ".join(f"{n}: {default_value(ft, env, depth + 1)}"
                           for n, ft in payload)
        return "{ " + fields + " }" if payload else "{ }"
    if kind == "sum":
        cname, ptext = payload[0]
        if ptext is None:
            return cname
        return f"{cname}({default_value(ptext, env, depth + 1)})"
    raise StubberError(f"no default for {t}")


# -------------------------------------------------------------------- stubs

def _stub_params(handler: HandlerSig) -> list[tuple[str, str]]:
    params: list[tuple[str, str]] = [("state", "ContractState"), ("deps", "Deps")]
    for pname, ptext, mapped in handler.params:
        if mapped is None:
            continue  # Deps-family stays out of the model signature
        base = mapped.text
        if base == "Env" or ptext.strip().lstrip("&").strip() == "Env":
            params.append((pname, "Env"))
        elif ptext.strip().lstrip("&").strip() == "MessageInfo":
            params.append((pname, "MessageInfo"))
        else:
            params.append((pname, _strip_parens(base)))
    return params


STUB_RETURN = "(Result[Response, ContractError], ContractState)"


def emit_stub(handler: HandlerSig) -> PureDef:
    if handler.mutability != "Mutating":
        raise StubberError(f"{handler.name} is not a mutating handler")
    return PureDef(handler.name, _stub_params(handler), STUB_RETURN,
                   STUB_BODY, is_stub=True)


def emit_contract_state(ir: ContractIR, env: dict) -> tuple[str, str, str]:
    lines = []
    for item in ir.state_items:
        lines.append(f"  {item.name}: {_field_type(item)}")
    type_def = "type ContractState = {\n" + ",\n".join(lines) + "\n}" \
        if lines else "type ContractState = { }"
    var_def = "var contract_state: ContractState"
    if ir.state_items:
        inits = ", ".join(
            f"{i.name}: {default_value(_field_type(i), env)}"
            for i in ir.state_items)
        init_value = "{ " + inits + " }"
    else:
        init_value = "{ }"
    return type_def, var_def, init_value


def _field_type(item: StateItem) -> str:
    if item.kind == "KeyedMap":
        return f"{item.key_type.text} -> {item.value_type.text}"
    return _strip_parens(item.value_type.text)


def emit_state_vars() -> list[tuple[str, str]]:
    return [
        ("contract_state", "ContractState"),
        ("bank", "Addr -> (str -> int)"),
        ("time", "int"),
        ("result", "Result[Response, ContractError]"),
    ]


# ------------------------------------------------------------------ actions

_POOL_KINDS = {
    "int": "int_range",
    "str": "addr",
    "Addr": "addr",
    "bool": "bool",
    "List[int]": "list_int",
    "List[str]": "list_addr",
    "List[Addr]": "list_addr",
    "Option[int]": "opt_int",
    "Option[str]": "opt_addr",
    "Option[Addr]": "opt_addr",
}


def handler_pick_specs(handler: HandlerSig, env: dict,
                       notes: list[str]) -> list[PickSpec]:
    picks: list[PickSpec] = []
    for pname, ptext, mapped in handler.params:
        if mapped is None:
            continue
        base = ptext.strip().lstrip("&").strip()
        if base in ("Env", "MessageInfo"):
            continue
        kind = _POOL_KINDS.get(_strip_parens(mapped.text))
        if kind is None:
            notes.append(
                f"{handler.name}: no pick pool for parameter {pname} of type "
                f"{mapped.text}; the action uses its default value")
            picks.append(PickSpec(pname, "default",
                                  default_value(_strip_parens(mapped.text), env)))
        else:
            picks.append(PickSpec(pname, kind))
    return picks


def _render_picks(picks: list[PickSpec], indent: str) -> list[str]:
    lines = []
    for p in picks:
        if p.kind == "int_range":
            lines.append(f"{indent}nondet {p.name} = oneOf(0.to(MAX_AMOUNT))")
        elif p.kind == "addr":
            lines.append(f"{indent}nondet {p.name} = oneOf(ADDRESSES)")
        elif p.kind == "bool":
            lines.append(f"{indent}nondet {p.name} = oneOf(Set(true, false))")
        elif p.kind in ("list_int", "list_addr"):
            pool = "0.to(MAX_AMOUNT)" if p.kind == "list_int" else "ADDRESSES"
            lines.append(f"{indent}nondet {p.name}__a = oneOf({pool})")
            lines.append(f"{indent}nondet {p.name}__b = oneOf({pool})")
            lines.append(f"{indent}nondet {p.name} = oneOf(Set([], "
                         f"[{p.name}__a], [{p.name}__a, {p.name}__b]))")
        elif p.kind in ("opt_int", "opt_addr"):
            pool = "0.to(MAX_AMOUNT)" if p.kind == "opt_int" else "ADDRESSES"
            lines.append(f"{indent}nondet {p.name}__v = oneOf({pool})")
            lines.append(f"{indent}nondet {p.name} = oneOf(Set(None, Some({p.name}__v)))")
        else:
            lines.append(f"{indent}val {p.name} = {p.default_text}")
    return lines


def _message_payload(handler: HandlerSig) -> list[str]:
    return [pname for pname, ptext, mapped in handler.params
            if mapped is not None
            and ptext.strip().lstrip("&").strip() not in ("Env", "MessageInfo")]


def _execute_payload_refs(ir: ContractIR) -> list[str]:
    """Type names referenced by ExecuteMsg payload fields (no ctor names)."""
    refs: list[str] = []
    for h in ir.handlers:
        if h.mutability != "Mutating" or h.name == "instantiate":
            continue
        for _pname, ptext, mapped in h.params:
            if mapped is None:
                continue
            if ptext.strip().lstrip("&").strip() in ("Env", "MessageInfo"):
                continue
            refs.extend(type_name_refs(_strip_parens(mapped.text)))
    return refs


def _handler_call_args(handler: HandlerSig, payload_from: str | None) -> list[str]:
    """Arguments for calling the handler's stub from the dispatcher."""
    args = ["state", "deps"]
    for pname, ptext, mapped in handler.params:
        if mapped is None:
            continue
        base = ptext.strip().lstrip("&").strip()
        if base == "Env":
            args.append("env")
        elif base == "MessageInfo":
            args.append("info")
        elif payload_from:
            args.append(f"{payload_from}.{pname}")
        else:
            args.append(pname)
    return args


def emit_actions(ir: ContractIR, env: dict, notes: list[str],
                 config: dict) -> tuple[list[ActionDef], str, dict, dict]:
    mutating = [h for h in ir.handlers if h.mutability == "Mutating"]
    instantiate = next((h for h in mutating if h.name == "instantiate"), None)
    dispatched = [h for h in mutating if h.name != "instantiate"]

    actions: list[ActionDef] = []
    picks_by_handler: dict[str, list[PickSpec]] = {}
    variant_by_handler: dict[str, str] = {}

    # --- ExecuteMsg type + execute dispatcher text (returned separately)
    exec_parts = []
    for h in dispatched:
        variant = f"ExecuteMsg_{camel(h.name)}"
        variant_by_handler[h.name] = variant
        payload = _message_payload(h)
        if payload:
            fields = ", ".join(
                f"{pname}: {_strip_parens(mapped.text)}"
                for pname, ptext, mapped in h.params
                if mapped is not None
                and ptext.strip().lstrip("&").strip() not in ("Env", "MessageInfo"))
            exec_parts.append(f"{variant}({{ {fields} }})")
        else:
            exec_parts.append(variant)
    dispatch_text = ""
    if dispatched:
        arms = []
        for h in dispatched:
            variant = variant_by_handler[h.name]
            if _message_payload(h):
                call = ", ".join(_handler_call_args(h, "args"))
                arms.append(f"    | {variant}(args) => {h.name}({call})")
            else:
                call = ", ".join(_handler_call_args(h, None))
                arms.append(f"    | {variant} => {h.name}({call})")
        # a single nullary variant needs a leading bar to parse as a sum type
        bar = "| " if len(exec_parts) == 1 and "(" not in exec_parts[0] else ""
        dispatch_text = (
            "type ExecuteMsg = " + bar + " | ".join(exec_parts) + "\n\n"
            "pure def execute(state: ContractState, deps: Deps, env: Env, "
            "info: MessageInfo, msg: ExecuteMsg): "
            "(Result[Response, ContractError], ContractState) =\n"
            "  match msg {\n" + "\n".join(arms) + "\n  }")

    # --- init
    actions.append(ActionDef("init", (
        "action init = all {\n"
        "  contract_state' = init_contract_state,\n"
        f"  bank' = {INIT_BANK_EXPR},\n"
        "  time' = 0,\n"
        "  result' = Ok(Response_new),\n"
        "}")))

    # --- instantiate (forced first step)
    if instantiate is not None:
        picks = handler_pick_specs(instantiate, env, notes)
        picks_by_handler["instantiate"] = picks
        lines = ["action instantiate_action = {"]
        lines += _render_picks(picks, "  ")
        lines.append('  val info = { sender: "admin", funds: [] }')
        lines.append("  val env = { block: { time: time, height: time } }")
        args = _handler_call_args(instantiate, None)
        args[0] = "contract_state"
        args[1] = "{ querier: { bank: bank } }"
        lines.append(f"  val r = {instantiate.name}({', '.join(args)})")
        lines.append("  all {")
        lines.append("    time == 0,")
        lines.append("    contract_state' = r._2,")
        lines.append("    result' = r._1,")
        lines.append("    bank' = bank,")
        lines.append("    time' = time + 1,")
        lines.append("  }")
        lines.append("}")
        actions.append(ActionDef("instantiate_action", "\n".join(lines)))

    # --- execute_message helper
    if dispatched:
        actions.append(ActionDef("execute_message", (
            "action execute_message(msg: ExecuteMsg) = {\n"
            "  nondet sender = oneOf(ADDRESSES)\n"
            "  nondet denom = oneOf(DENOMS)\n"
            "  nondet amount = oneOf(0.to(MAX_AMOUNT))\n"
            "  val funds = if (amount == 0) [] else [{ denom: denom, amount: amount }]\n"
            "  val info = { sender: sender, funds: funds }\n"
            "  val env = { block: { time: time, height: time } }\n"
            "  val bank_during = bank_transfer(bank, sender, CONTRACT_ADDRESS, funds)\n"
            "  val r = execute(contract_state, { querier: { bank: bank_during } }, "
            "env, info, msg)\n"
            "  all {\n"
            "    time > 0,\n"
            "    pending_messages(result).length() == 0,\n"
            "    bank_balance(bank, sender, denom) >= amount,\n"
            "    contract_state' = r._2,\n"
            "    result' = r._1,\n"
            "    bank' = match r._1 { | Ok(_) => bank_during | Err(_) => bank },\n"
            "    time' = time + 1,\n"
            "  }\n"
            "}")))

    # --- one action per dispatched handler
    for h in dispatched:
        picks = handler_pick_specs(h, env, notes)
        picks_by_handler[h.name] = picks
        variant = variant_by_handler[h.name]
        payload = _message_payload(h)
        msg = variant if not payload else \
            variant + "({ " + ", ".join(f"{p}: {p}" for p in payload) + " })"
        if picks:
            body = "\n".join(
                [f"action {h.name}_action = {{"]
                + _render_picks(picks, "  ")
                + [f"  execute_message({msg})", "}"])
        else:
            body = f"action {h.name}_action = execute_message({msg})"
        actions.append(ActionDef(f"{h.name}_action", body))

    # --- pending-message processor and step
    actions.append(ActionDef("process_pending_message", (
        "action process_pending_message = {\n"
        "  val pending = pending_messages(result)\n"
        "  all {\n"
        "    time > 0,\n"
        "    pending.length() > 0,\n"
        "    contract_state' = contract_state,\n"
        "    result' = result_after_pop(result),\n"
        "    bank' = apply_bank_message(bank, pending.head()),\n"
        "    time' = time + 1,\n"
        "  }\n"
        "}")))

    step_items = ["process_pending_message"]
    if instantiate is not None:
        step_items.append("instantiate_action")
    step_items += [f"{h.name}_action" for h in dispatched]
    if not mutating:
        notes.append("model has no mutating handlers: step can only process "
                     "pending messages and will deadlock")
    actions.append(ActionDef("step", (
        "action step = any {\n"
        + "".join(f"  {s},\n" for s in step_items)
        + "}")))
    return actions, dispatch_text, picks_by_handler, variant_by_handler


# ------------------------------------------------------------------ prelude

def _prelude_vals(config: dict) -> str:
    addresses = ", ".join(_quote(a) for a in config["addresses"])
    denoms = ", ".join(_quote(d) for d in config["denoms"])
    return f"""pure val ADDRESSES = Set({addresses})
pure val DENOMS = Set({denoms})
pure val MAX_AMOUNT = {config["max_amount"]}
pure val CONTRACT_ADDRESS = {_quote(config["contract_address"])}
pure val DENOM = {_quote(config["default_denom"])}"""


PRELUDE_TYPES = """type Addr = str
type Coin = { denom: str, amount: int }
type MessageInfo = { sender: Addr, funds: List[Coin] }
type Env = { block: { time: int, height: int } }
type Bank = Addr -> (str -> int)
type Deps = { querier: { bank: Bank } }
type AttrValue = FromStr(str) | FromInt(int)
type Attribute = { key: str, value: AttrValue }
type BankMsg = BankMsg_Send({ to_address: Addr, amount: List[Coin] })
type CosmosMsg = CosmosMsg_Bank(BankMsg)
type Response = { messages: List[CosmosMsg], attributes: List[Attribute] }
type ContractError = str"""

# Structural references for the fixed prelude above: type names a
# definition mentions, excluding its own constructor names (FromStr,
# BankMsg_Send, ...), which are values rather than types.
_PRELUDE_TYPE_REFS = {
    "Addr": [],
    "Coin": [],
    "MessageInfo": ["Addr", "Coin"],
    "Env": [],
    "Bank": ["Addr"],
    "Deps": ["Bank"],
    "AttrValue": [],
    "Attribute": ["AttrValue"],
    "BankMsg": ["Addr", "Coin"],
    "CosmosMsg": ["BankMsg"],
    "Response": ["CosmosMsg", "Attribute"],
    "ContractError": [],
}

PRELUDE_DEFS = """pure val Response_new: Response = { messages: [], attributes: [] }

pure def add_attribute(r: Response, key: str, value: AttrValue): Response =
  { ...r, attributes: r.attributes.append({ key: key, value: value }) }

pure def add_message(r: Response, msg: CosmosMsg): Response =
  { ...r, messages: r.messages.append(msg) }

pure def must_pay(info: MessageInfo, denom: str): Result[int, ContractError] =
  if (info.funds.length() == 0) Err("No funds sent")
  else if (info.funds.length() > 1) Err("More than one denomination")
  else {
    val coin = info.funds.head()
    if (coin.denom != denom) Err("Unexpected denom")
    else if (coin.amount == 0) Err("No funds sent")
    else Ok(coin.amount)
  }

pure def move_coin(b: Bank, origin: Addr, dest: Addr, c: Coin): Bank = {
  val b1 = b.put(origin, b.getOrElse(origin, Map()).put(c.denom, b.getOrElse(origin, Map()).getOrElse(c.denom, 0) - c.amount))
  b1.put(dest, b1.getOrElse(dest, Map()).put(c.denom, b1.getOrElse(dest, Map()).getOrElse(c.denom, 0) + c.amount))
}

pure def bank_transfer(b: Bank, origin: Addr, dest: Addr, coins: List[Coin]): Bank =
  coins.foldl(b, (acc, c) => move_coin(acc, origin, dest, c))

pure def bank_balance(b: Bank, owner: Addr, denom: str): int =
  b.getOrElse(owner, Map()).getOrElse(denom, 0)

pure def pending_messages(r: Result[Response, ContractError]): List[CosmosMsg] =
  match r { | Ok(resp) => resp.messages | Err(_) => [] }

pure def result_after_pop(r: Result[Response, ContractError]): Result[Response, ContractError] =
  match r { | Ok(resp) => Ok({ ...resp, messages: resp.messages.tail() }) | Err(_) => r }

pure def apply_bank_message(b: Bank, msg: CosmosMsg): Bank =
  match msg {
    | CosmosMsg_Bank(bank_msg) => match bank_msg {
      | BankMsg_Send(send) => bank_transfer(b, CONTRACT_ADDRESS, send.to_address, send.amount)
    }
  }"""


def _contract_constants(ir: ContractIR, notes: list[str]) -> list[str]:
    state_consts = {i.const_name for i in ir.state_items}
    out = []
    for c in ir.constants:
        if c.name in state_consts:
            continue
        if c.name in RESERVED_VALS:
            notes.append(f"constant {c.name} collides with a built-in value; skipped")
            continue
        init = c.init_text.strip()
        m = re.fullmatch(r"(?:Uint128::new|Uint64::new)\(\s*(\d+)\s*\)", init)
        if m:
            out.append(f"pure val {c.name} = {m.group(1)}")
        elif re.fullmatch(r"\d+", init):
            out.append(f"pure val {c.name} = {init}")
        elif re.fullmatch(r'"(?:[^"\\]|\\.)*"', init):
            out.append(f"pure val {c.name} = {init}")
        else:
            notes.append(f"constant {c.name} has a non-literal initializer; skipped")
    return out


# ------------------------------------------------------------------- model

def emit_model(ir: ContractIR, config: dict | None = None) -> ModelDocument:
    cfg = dict(DEFAULT_CONFIG)
    if config:
        cfg.update({k: v for k, v in config.items() if k in DEFAULT_CONFIG})
    notes: list[str] = []

    type_defs, env = _collect_type_defs(ir, notes)
    state_type, state_var, init_value = emit_contract_state(ir, env)
    consts = _contract_constants(ir, notes)

    stubs: dict[str, PureDef] = {}
    for h in ir.handlers:
        if h.mutability == "Mutating":
            stubs[h.name] = emit_stub(h)

    actions, dispatch_text, picks, variants = emit_actions(ir, env, notes, cfg)

    sections: list[str] = []
    sections.append(_prelude_vals(cfg))
    if consts:
        sections.append("\n".join(consts))
    sections.append(PRELUDE_TYPES)
    if type_defs:
        sections.append("\n\n".join(t.text for t in type_defs))
    sections.append(state_type + "\n" + state_var)
    sections.append(PRELUDE_DEFS)
    sections.append(f"pure val init_contract_state: ContractState = {init_value}")
    for d in stubs.values():
        sections.append(d.text)
    if dispatch_text:
        sections.append(dispatch_text)
    sections.append("var bank: Bank\nvar time: int\n"
                    "var result: Result[Response, ContractError]")
    for a in actions:
        sections.append(a.text)

    indented = "\n\n".join(sections)
    indented = "\n".join(("  " + line if line.strip() else line)
                         for line in indented.splitlines())
    text = (f"module {ir.name} {{\n{indented}\n}}\n")

    prelude_type_defs = [
        TypeDef(n, t, _PRELUDE_TYPE_REFS[n])
        for n, t in _parse_prelude_types()
    ]
    all_types = prelude_type_defs + type_defs + [
        TypeDef("ContractState", state_type,
                [r for i in ir.state_items for r in type_name_refs(_field_type(i))])
    ]
    if dispatch_text:
        exec_def = dispatch_text.split("\n\n")[0]
        all_types.append(TypeDef("ExecuteMsg", exec_def,
                                 _execute_payload_refs(ir)))

    return ModelDocument(
        module_name=ir.name,
        type_defs=all_types,
        state_vars=emit_state_vars(),
        pure_defs=list(stubs.values()),
        actions=actions,
        init_value=init_value,
        text=text,
        stubs=stubs,
        handler_picks=picks,
        message_variants=variants,
        constants=_prelude_vals(cfg).splitlines() + consts,
        notes=notes,
        config=cfg,
    )


def _parse_prelude_types() -> list[tuple[str, str]]:
    out = []
    for block in PRELUDE_TYPES.split("\n"):
        if block.startswith("type "):
            name = block.split()[1]
            out.append((name, block))
    return out


# ------------------------------------------------------------------ adapter

_ADAPTER_TEMPLATE = """// Trace replay test for the {name} contract.
// Generated file: replays JSON traces from the model against the
// contract implementation through cw-multi-test.

use cosmwasm_std::{{coin, Addr, Uint128}};
use cw_multi_test::{{App, AppBuilder, ContractWrapper, Executor}};
use num_traits::cast::ToPrimitive;

pub const DENOM: &str = "{denom}";
pub const TICK_SECONDS: u64 = 1;

pub struct TestState {{
    pub app: App,
    pub contract_addr: Addr,
}}

fn mint_tokens(mut app: App, recipient: String, amount: Uint128) -> App {{
    app.sudo(cw_multi_test::SudoMsg::Bank(
        cw_multi_test::BankSudo::Mint {{
            to_address: recipient.to_owned(),
            amount: vec![coin(amount.u128(), DENOM)],
        }},
    ))
    .unwrap();
    app
}}

{compare_state}

#[test]
fn model_test() {{
    let mut state = load_trace("traces/trace.json");
    let mut app = AppBuilder::default().build(|_, _, _| {{}});

    // step 0: instantiate as admin, then replay each trace state:
    // advance the clock by TICK_SECONDS, apply the recorded message with
    // the recorded sender and funds, compare the result kind, then call
    // compare_state against the trace snapshot.
    for step in state.steps() {{
        app.update_block(|block| {{
            block.time = block.time.plus_seconds(TICK_SECONDS);
            block.height += 1;
        }});
        step.apply(&mut app);
    }}
}}
"""

_COMPARE_STATE = """fn compare_state(test_state: &TestState, app: &App, state: &State) {
    // compare contract balances
    let balance = app
        .wrap()
        .query_balance(&test_state.contract_addr, DENOM)
        .unwrap()
        .amount;
    let trace_balance = state
        .bank
        .get(&test_state.contract_addr.to_string())
        .and_then(|x| x.get(DENOM))
        .and_then(|x| x.to_u128())
        .unwrap_or(0);
    println!(
        "Contract balance ({:?}) for {DENOM}: {:?} vs {:?}",
        test_state.contract_addr,
        balance,
        Uint128::new(trace_balance)
    );
    assert_eq!(balance, Uint128::new(trace_balance));

    // TODO: Query the contract and compare the state as you wish
}"""


def emit_adapter_stub(ir: ContractIR, config: dict | None = None) -> AdapterDocument:
    cfg = dict(DEFAULT_CONFIG)
    if config:
        cfg.update({k: v for k, v in config.items() if k in DEFAULT_CONFIG})
    text = _ADAPTER_TEMPLATE.format(
        name=ir.name, denom=cfg["default_denom"], compare_state=_COMPARE_STATE)
    start = text.index("fn compare_state(")
    end = text.index(ADAPTER_PLACEHOLDER)
    end = text.index("}", end) + 1
    return AdapterDocument(text, (start, end))
