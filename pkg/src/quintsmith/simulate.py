"""Bounded simulation of emitted models and trace replay checking.

The simulator never reimplements contract semantics: every state change is
computed by evaluating the model's own definitions (execute, bank_transfer,
pending_messages, ...) through the kernel evaluator.  Python only mirrors
the wiring of the emitted actions - which action fires, which
nondeterministic picks are made - and records those choices in the trace so
a replay can repeat the run exactly.

A trace is a plain JSON document:

    {"meta": {"version": "1", "module": <name>, "seed": <int>},
     "states": [{"action": ..., "picks": {...}, "msg": ...,
                 "contract_state": ..., "bank": ..., "time": ...,
                 "result": ...}, ...]}

State 0 is the state after ``init`` plus the forced ``instantiate_action``;
each later entry holds the variable values after one more transition.
Variable values use the kernel's JSON encoding and are compared with
structural value equality on replay, so ``replay_trace`` needs only the
model text and the trace, not the document the model was emitted from.

Replay re-checks every action guard (clock, pending queue, bank balances,
pick pools).  A trace that violates a guard or disagrees with a recomputed
variable raises DivergenceAt; a trace with the wrong shape raises
SchemaError; an empty trace is trivially consistent.
"""

from __future__ import annotations

import json
import random

from .kernel import (
    Evaluator, ParseError, RuntimeEvalError, VInt, VList, VRecord, VStr,
    Value, VVariant, parse_module, print_type, render_all, render_value,
    typecheck, value_from_jsonable, value_to_jsonable, values_equal,
)
from .kernel.syntax import DDef, Module
from .stubber import (
    INIT_BANK_EXPR, ModelDocument, PickSpec, TRACE_SCHEMA_VERSION,
)

__all__ = [
    "DivergenceAt", "SchemaError", "SimulateError",
    "load_trace", "replay_trace", "simulate", "write_trace",
]


class SimulateError(Exception):
    """The model cannot be simulated (it does not parse or typecheck)."""


class SchemaError(Exception):
    """The trace document does not have the expected shape."""


class DivergenceAt(Exception):
    """Replay reached a state that disagrees with the recorded one."""

    def __init__(self, step: int, detail: str):
        super().__init__(f"divergence at step {step}: {detail}")
        self.step = step
        self.detail = detail


# ----------------------------------------------------------------- loading

def _load(model_text: str) -> tuple[Module, Evaluator]:
    try:
        module = parse_module(model_text, file="<model>")
    except ParseError as e:
        raise SimulateError(e.diagnostic.render()) from e
    diags = typecheck(module)
    if diags:
        raise SimulateError(render_all(diags))
    return module, Evaluator(module)


_PARAM_KINDS = {"ContractState": "state", "Deps": "deps",
                "Env": "env", "MessageInfo": "info"}


def _instantiate_params(module: Module) -> list[tuple[str, str]] | None:
    """(name, kind) per instantiate parameter, or None when there is none.

    Classified from the model text itself so replay does not need the
    emitter's document.
    """
    for d in module.decls:
        if isinstance(d, DDef) and d.kind == "pure" and d.name == "instantiate":
            return [(p, _PARAM_KINDS.get(print_type(t).strip(), "value"))
                    for p, t in d.params]
    return None


def _deps(bank: Value) -> Value:
    return VRecord({"querier": VRecord({"bank": bank})})


def _env_value(time: int) -> Value:
    block = VRecord({"time": VInt(time), "height": VInt(time)})
    return VRecord({"block": block})


def _info_value(sender: str, funds: Value) -> Value:
    return VRecord({"sender": VStr(sender), "funds": funds})


def _funds_value(denom: str, amount: int) -> Value:
    if amount == 0:
        return VList([])
    return VList([VRecord({"denom": VStr(denom), "amount": VInt(amount)})])


def _is_ok(result: Value) -> bool:
    return isinstance(result, VVariant) and result.name == "Ok"


# --------------------------------------------------------------- simulator

def _sample_pick(spec: PickSpec, cfg: dict, rng: random.Random) -> str:
    """One sampled expression text, drawn from the same pools the emitted
    action offers to oneOf."""

    def draw(pool: str) -> str:
        if pool == "int":
            return str(rng.randint(0, cfg["max_amount"]))
        return json.dumps(rng.choice(cfg["addresses"]))

    if spec.kind == "int_range":
        return draw("int")
    if spec.kind == "addr":
        return draw("addr")
    if spec.kind == "bool":
        return rng.choice(["true", "false"])
    if spec.kind in ("list_int", "list_addr"):
        a = draw("int" if spec.kind == "list_int" else "addr")
        b = draw("int" if spec.kind == "list_int" else "addr")
        return rng.choice(["[]", f"[{a}]", f"[{a}, {b}]"])
    if spec.kind in ("opt_int", "opt_addr"):
        v = draw("int" if spec.kind == "opt_int" else "addr")
        return rng.choice(["None", f"Some({v})"])
    return spec.default_text


def simulate(model_text: str, doc: ModelDocument, *, steps: int = 20,
             seed: int = 0) -> dict:
    """Run a bounded random walk over the model's actions.

    `steps` bounds the transitions taken after the forced instantiate
    step; the walk stops early when no action is enabled.
    """
    module, ev = _load(model_text)
    cfg = doc.config
    rng = random.Random(seed)

    state = ev.eval_expr("init_contract_state")
    bank = ev.eval_expr(INIT_BANK_EXPR)
    time = 0
    result = ev.eval_expr("Ok(Response_new)")

    states: list[dict] = []

    def snapshot(action: str, **extra) -> None:
        states.append({"action": action, **extra,
                       "contract_state": value_to_jsonable(state),
                       "bank": value_to_jsonable(bank),
                       "time": time,
                       "result": value_to_jsonable(result)})

    inst_params = _instantiate_params(module)
    if inst_params is not None:
        texts = {p.name: _sample_pick(p, cfg, rng)
                 for p in doc.handler_picks.get("instantiate", [])}
        args: list[Value] = []
        for name, kind in inst_params:
            if kind == "state":
                args.append(state)
            elif kind == "deps":
                args.append(_deps(bank))
            elif kind == "env":
                args.append(_env_value(time))
            elif kind == "info":
                args.append(_info_value("admin", VList([])))
            else:
                args.append(ev.eval_expr(texts[name]))
        r = ev.call("instantiate", args)
        result, state = r.items[0], r.items[1]
        time += 1
        snapshot("instantiate_action", args=texts)

    dispatched = list(doc.message_variants)
    for _ in range(steps):
        if time == 0:
            break
        pending = ev.call("pending_messages", [result])
        if pending.items:
            bank = ev.call("apply_bank_message", [bank, pending.items[0]])
            result = ev.call("result_after_pop", [result])
            time += 1
            snapshot("process_pending_message")
            continue
        if not dispatched:
            break
        handler = rng.choice(dispatched)
        sender = rng.choice(cfg["addresses"])
        denom = rng.choice(cfg["denoms"])
        balance = ev.call("bank_balance", [bank, VStr(sender), VStr(denom)])
        # the legal picks are exactly 0..MAX_AMOUNT with balance >= amount
        amount = rng.randint(0, min(cfg["max_amount"], balance.n))
        funds = _funds_value(denom, amount)
        bank_during = ev.call("bank_transfer", [
            bank, VStr(sender), VStr(cfg["contract_address"]), funds])
        picks = {p.name: _sample_pick(p, cfg, rng)
                 for p in doc.handler_picks.get(handler, [])}
        variant = doc.message_variants[handler]
        msg_text = variant if not picks else \
            variant + "({ " + ", ".join(f"{n}: {t}" for n, t in picks.items()) + " })"
        r = ev.call("execute", [state, _deps(bank_during), _env_value(time),
                                _info_value(sender, funds),
                                ev.eval_expr(msg_text)])
        result, state = r.items[0], r.items[1]
        if _is_ok(result):
            bank = bank_during
        time += 1
        snapshot(f"{handler}_action",
                 picks={"sender": sender, "denom": denom, "amount": amount},
                 msg=msg_text)

    return {"meta": {"version": TRACE_SCHEMA_VERSION,
                     "module": doc.module_name, "seed": seed},
            "states": states}


def write_trace(trace: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(trace, f, indent=2)
        f.write("\n")


def load_trace(path) -> dict:
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: not JSON: {e}") from e


# ------------------------------------------------------------------ replay

_REQUIRED_STATE_KEYS = ("action", "contract_state", "bank", "time", "result")


def _check_schema(trace) -> list[dict]:
    if not isinstance(trace, dict):
        raise SchemaError("trace must be a JSON object")
    meta = trace.get("meta")
    if not isinstance(meta, dict):
        raise SchemaError("trace has no meta object")
    version = meta.get("version")
    if version != TRACE_SCHEMA_VERSION:
        raise SchemaError(f"unsupported trace version: {version!r} "
                          f"(expected {TRACE_SCHEMA_VERSION!r})")
    states = trace.get("states")
    if not isinstance(states, list):
        raise SchemaError("trace has no states list")
    for i, st in enumerate(states):
        if not isinstance(st, dict):
            raise SchemaError(f"state {i} is not an object")
        for key in _REQUIRED_STATE_KEYS:
            if key not in st:
                raise SchemaError(f"state {i} is missing {key!r}")
        if not isinstance(st["action"], str):
            raise SchemaError(f"state {i}: action must be a string")
        if not isinstance(st["time"], int) or isinstance(st["time"], bool):
            raise SchemaError(f"state {i}: time must be an integer")
    return states


def _recorded_value(st: dict, key: str, step: int) -> Value:
    try:
        return value_from_jsonable(st[key])
    except Exception as e:
        raise SchemaError(f"state {step}: {key} is not a value encoding: {e}") from e


def _eval_trace_expr(ev: Evaluator, text: str, step: int, what: str) -> Value:
    try:
        return ev.eval_expr(text)
    except (ParseError, RuntimeEvalError) as e:
        raise SchemaError(
            f"state {step}: {what} does not evaluate: "
            f"{e.diagnostic.header()}") from e


def replay_trace(model_text: str, trace: dict) -> list[str]:
    """Re-execute a trace against the model, guard by guard, value by value.

    Returns the step log on success; raises DivergenceAt on the first step
    whose guards or recomputed variables disagree with the recording.
    """
    states = _check_schema(trace)
    module, ev = _load(model_text)
    inst_params = _instantiate_params(module)

    state = ev.eval_expr("init_contract_state")
    bank = ev.eval_expr(INIT_BANK_EXPR)
    time = 0
    result = ev.eval_expr("Ok(Response_new)")

    log: list[str] = []
    for i, st in enumerate(states):
        action = st["action"]
        detail: list[str] = []

        if action == "instantiate_action":
            if inst_params is None:
                raise SchemaError(f"state {i}: the model has no instantiate "
                                  "handler")
            if time != 0:
                raise DivergenceAt(i, "instantiate_action requires time == 0")
            texts = st.get("args", {})
            if not isinstance(texts, dict):
                raise SchemaError(f"state {i}: args must be an object")
            args: list[Value] = []
            for name, kind in inst_params:
                if kind == "state":
                    args.append(state)
                elif kind == "deps":
                    args.append(_deps(bank))
                elif kind == "env":
                    args.append(_env_value(time))
                elif kind == "info":
                    args.append(_info_value("admin", VList([])))
                elif name not in texts:
                    raise SchemaError(f"state {i}: missing instantiate "
                                      f"argument {name!r}")
                else:
                    args.append(_eval_trace_expr(ev, texts[name], i,
                                                 f"argument {name}"))
            r = _step_call(ev, "instantiate", args, i)
            result, state = r.items[0], r.items[1]
            time += 1
            detail.append('Sender: Some("admin")')

        elif action == "process_pending_message":
            if time == 0:
                raise DivergenceAt(i, "process_pending_message requires "
                                      "time > 0")
            pending = ev.call("pending_messages", [result])
            if not pending.items:
                raise DivergenceAt(i, "no pending bank messages to process")
            bank = ev.call("apply_bank_message", [bank, pending.items[0]])
            result = ev.call("result_after_pop", [result])
            time += 1

        elif action.endswith("_action"):
            picks = st.get("picks")
            msg_text = st.get("msg")
            if not isinstance(picks, dict) or not isinstance(msg_text, str):
                raise SchemaError(f"state {i}: an execute step needs picks "
                                  "and msg")
            sender, denom, amount = (picks.get("sender"), picks.get("denom"),
                                     picks.get("amount"))
            if not isinstance(sender, str) or not isinstance(denom, str) \
                    or not isinstance(amount, int) or isinstance(amount, bool):
                raise SchemaError(f"state {i}: picks must carry a sender, a "
                                  "denom and an integer amount")
            if time == 0:
                raise DivergenceAt(i, f"{action} requires time > 0")
            pending = ev.call("pending_messages", [result])
            if pending.items:
                raise DivergenceAt(i, "pending bank messages must be "
                                      "processed first")
            for pool, member in (("ADDRESSES", json.dumps(sender)),
                                 ("DENOMS", json.dumps(denom))):
                if not ev.eval_expr(f"{pool}.contains({member})").b:
                    raise DivergenceAt(i, f"{member} is not in {pool}")
            if not 0 <= amount <= ev.eval_expr("MAX_AMOUNT").n:
                raise DivergenceAt(i, f"amount {amount} is outside the "
                                      "0..MAX_AMOUNT pick pool")
            balance = ev.call("bank_balance", [bank, VStr(sender),
                                               VStr(denom)]).n
            if balance < amount:
                raise DivergenceAt(i, f"{sender} holds {balance} {denom}, "
                                      f"below the attached {amount}")
            funds = _funds_value(denom, amount)
            contract = ev.eval_expr("CONTRACT_ADDRESS")
            bank_during = ev.call("bank_transfer",
                                  [bank, VStr(sender), contract, funds])
            msg = _eval_trace_expr(ev, msg_text, i, "msg")
            r = _step_call(ev, "execute",
                           [state, _deps(bank_during), _env_value(time),
                            _info_value(sender, funds), msg], i)
            result, state = r.items[0], r.items[1]
            if _is_ok(result):
                bank = bank_during
            time += 1
            detail.append(f"Sender: Some({json.dumps(sender)})")
            detail.append(f"Message: {msg_text}")

        else:
            raise SchemaError(f"state {i}: unknown action {action!r}")

        for key, got in (("contract_state", state), ("bank", bank),
                         ("result", result)):
            want = _recorded_value(st, key, i)
            if not values_equal(got, want):
                raise DivergenceAt(
                    i, f"{key} mismatch: the model reaches "
                       f"{render_value(got)} but the trace records "
                       f"{render_value(want)}")
        if st["time"] != time:
            raise DivergenceAt(i, f"time mismatch: the model reaches {time} "
                                  f"but the trace records {st['time']}")

        log.append(f"Step number: Some({i})")
        log.append(f"Action taken: {action}")
        log.extend(detail)
        log.append("clock is advancing for 1 seconds")
        log.append("-" * 50)
    return log


def _step_call(ev: Evaluator, name: str, args: list[Value],
               step: int) -> Value:
    try:
        return ev.call(name, args)
    except RuntimeEvalError as e:
        raise DivergenceAt(
            step, f"the model cannot take this step: "
                  f"{e.diagnostic.header()}") from e
