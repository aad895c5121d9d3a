"""Per-stub synthesis and the budgeted test-and-repair loop.

A stub is completed in isolation: the candidate replaces exactly its
own definition and every other definition in the model stays
byte-identical. The loop then walks the three failure categories in a
fixed order: static problems (parse or typecheck), runtime errors while
executing the generation examples, and semantic mismatches against the
expected outputs. Each category has its own repair budget; one round
asks the gateway for a fix and consumes one unit of the firing
category. The loop exits as soon as the firing category is out of
budget, even if a later category could still fire.

Budget accounting counts logical asks: the gateway's automatic format
re-ask is transport-level and never consumes a round, so
llm_calls <= 1 + static + runtime + semantic always holds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from .gateway import Gateway, GatewayError, GenerationRequest, complete_code
from .iospec import IoExample, IoMismatch, IoSpecError
from .kernel import (
    Evaluator, Module, ParseError, RuntimeEvalError, parse_module,
    print_type, render_all, render_value, typecheck, values_equal,
)
from .kernel.syntax import DDef
from .prompting import (
    FewShotSet, RepairKind, StubContext, build_generation_messages,
    build_repair_messages, make_repair_context, make_stub_context,
)
from .stubber import ModelDocument

log = logging.getLogger(__name__)


class BadCandidate(Exception):
    """The response's code cannot be installed as the named stub."""


class NameMismatch(BadCandidate):
    def __init__(self, got: str, want: str):
        self.got = got
        self.want = want
        super().__init__(
            f"the returned definition is named `{got}` but must be named `{want}`")


@dataclass
class Budgets:
    static_rounds: int = 3
    runtime_rounds: int = 3
    semantic_rounds: int = 3

    def __post_init__(self):
        for name in ("static_rounds", "runtime_rounds", "semantic_rounds"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.static_rounds + self.runtime_rounds + self.semantic_rounds


@dataclass
class Rounds:
    static: int = 0
    runtime: int = 0
    semantic: int = 0

    @property
    def total(self) -> int:
        return self.static + self.runtime + self.semantic

    def as_dict(self) -> dict[str, int]:
        return {"static": self.static, "runtime": self.runtime,
                "semantic": self.semantic}


class Status(Enum):
    SUCCESS = "success"
    FAILED_STATIC = "failed_static"
    FAILED_RUNTIME = "failed_runtime"
    FAILED_SEMANTIC = "failed_semantic"


_FAILURE_FOR = {
    "static": Status.FAILED_STATIC,
    "runtime": Status.FAILED_RUNTIME,
    "semantic": Status.FAILED_SEMANTIC,
}


@dataclass
class StubOutcome:
    stub_name: str
    final_code: str
    rounds_used: Rounds
    status: Status
    residual: list
    llm_calls: int

    def to_jsonable(self) -> dict:
        residual = [m.__dict__ if isinstance(m, IoMismatch) else str(m)
                    for m in self.residual]
        return {
            "stub_name": self.stub_name,
            "status": self.status.value,
            "rounds_used": self.rounds_used.as_dict(),
            "llm_calls": self.llm_calls,
            "final_code": self.final_code,
            "residual": residual,
        }


@dataclass
class StubTask:
    fn_name: str
    description: str = ""
    examples: list[IoExample] = field(default_factory=list)
    seed: int = 0
    model_id: str = "offline"


# ------------------------------------------------------------- filled model

def _indent(text: str) -> str:
    return "\n".join("  " + line if line.strip() else line
                     for line in text.splitlines())


class FilledModel:
    """The emitted model with each stub def as a replaceable slot.

    Rendering concatenates the fixed text between slots with the current
    code of each slot, so replacing one def can never disturb another.
    """

    def __init__(self, doc: ModelDocument):
        self.doc = doc
        self._codes = {name: stub.text for name, stub in doc.stubs.items()}
        spans = []
        for name, stub in doc.stubs.items():
            marked = _indent(stub.text)
            start = doc.text.index(marked)
            spans.append((start, start + len(marked), name))
        spans.sort()
        segments: list[tuple[str, str]] = []
        prev = 0
        for start, end, name in spans:
            segments.append(("text", doc.text[prev:start]))
            segments.append(("slot", name))
            prev = end
        segments.append(("text", doc.text[prev:]))
        self._segments = segments

    @property
    def slot_names(self) -> list[str]:
        return [payload for kind, payload in self._segments if kind == "slot"]

    def code_of(self, name: str) -> str:
        return self._codes[name]

    def text(self) -> str:
        return "".join(payload if kind == "text" else _indent(self._codes[payload])
                       for kind, payload in self._segments)


_WRAPPER = "module _candidate {\n"


def _norm(sig_text: str) -> str:
    return " ".join(sig_text.split())


def replace_def(filled: FilledModel, name: str, code: str) -> str:
    """Validate `code` as the one pure def named `name` and install it.

    A candidate whose signature drifts from the stub's is rewritten to
    the stub signature (keeping its body) and the drift is logged.
    Raises NameMismatch / BadCandidate for code that cannot be used;
    the model is left unchanged in that case.
    """
    code = code.strip("\n")
    wrapped = _WRAPPER + code + "\n}"
    try:
        mod = parse_module(wrapped, file="<candidate>")
    except ParseError as e:
        raise BadCandidate(
            f"the response does not parse: {e.diagnostic.header()}") from e
    if len(mod.decls) != 1 or not isinstance(mod.decls[0], DDef) \
            or mod.decls[0].kind != "pure":
        raise BadCandidate("the response must define exactly one `pure def`")
    d = mod.decls[0]
    if d.name != name:
        raise NameMismatch(d.name, name)

    stub = filled.doc.stubs[name]
    got_sig = ([(p, _norm(print_type(t))) for p, t in d.params],
               _norm(print_type(d.ret)) if d.ret is not None else "")
    want_sig = ([(p, _norm(t)) for p, t in stub.params],
                _norm(stub.return_type))
    if got_sig != want_sig:
        log.warning("signature drift in %s: rewriting to the stub signature",
                    name)
        # signatures cannot contain `=`, so the first one starts the body
        body_text = code.split("=", 1)[1].strip("\n ").rstrip()
        params = ", ".join(f"{p}: {t}" for p, t in stub.params)
        code = (f"pure def {stub.name}({params}): {stub.return_type} = "
                f"{body_text}")

    filled._codes[name] = code
    return code


# ------------------------------------------------------------------ checks

def _eval_args(ev: Evaluator, ex: IoExample) -> list:
    try:
        return [ev.eval_expr(a) for a in ex.args]
    except RuntimeEvalError as e:
        raise IoSpecError(
            f"{ex.label or ex.fn}: argument expression failed to evaluate: "
            f"{e.diagnostic.header()}") from e


def runtime_failures(module: Module, fn: str,
                     examples: list[IoExample]) -> list[str]:
    """Rendered runtime errors raised while executing the examples.
    Failures in the user's own argument expressions raise IoSpecError
    instead: they would fire identically for every candidate."""
    ev = Evaluator(module)
    failures = []
    for ex in examples:
        args = _eval_args(ev, ex)
        try:
            ev.call(fn, args)
        except RuntimeEvalError as e:
            call = f"{fn}({', '.join(ex.args)})"
            failures.append(f"{call} fails:\n{e.diagnostic.render_runtime()}")
    return failures


def check_semantics(module: Module, fn: str, examples: list[IoExample]
                    ) -> dict[tuple[tuple[str, ...], str], str]:
    """Mapping (args, expected) -> rendered actual, for exactly the
    examples whose output differs from the expectation."""
    ev = Evaluator(module)
    out: dict[tuple[tuple[str, ...], str], str] = {}
    for ex in examples:
        args = _eval_args(ev, ex)
        got = ev.call(fn, args)
        try:
            want = ev.eval_expr(ex.expected)
        except RuntimeEvalError as e:
            raise IoSpecError(
                f"{ex.label or ex.fn}: expected-value expression failed to "
                f"evaluate: {e.diagnostic.header()}") from e
        if not values_equal(got, want):
            out[(tuple(ex.args), ex.expected)] = render_value(got)
    return out


# --------------------------------------------------------------- main loop

def _diagnose(filled: FilledModel, fn: str, examples: list[IoExample]
              ) -> tuple[str | None, list]:
    """(category, evidence) for the first firing category, or (None, [])."""
    try:
        module = parse_module(filled.text(), file="<model>")
    except ParseError as e:  # parse problems are static by definition
        return "static", [e.diagnostic.render()]
    diags = typecheck(module)
    if diags:
        return "static", [render_all(diags)]
    failures = runtime_failures(module, fn, examples)
    if failures:
        return "runtime", failures
    mapping = check_semantics(module, fn, examples)
    if mapping:
        mismatches = [IoMismatch(fn, list(args), actual, expected)
                      for (args, expected), actual in mapping.items()]
        return "semantic", mismatches
    return None, []


def test_and_repair(ctx: StubContext, filled: FilledModel, gateway: Gateway,
                    budgets: Budgets | None = None, *,
                    seed: int = 0, model_id: str = "offline",
                    current_code: str | None = None,
                    candidate_problem: str | None = None,
                    llm_calls: int = 0) -> StubOutcome:
    """Drive the category loop until success or an exhausted budget.

    `candidate_problem` carries the install error of a candidate that
    never made it into the model; it is treated as a static diagnostic
    and `current_code` is then the unusable candidate itself.
    """
    budgets = budgets or Budgets()
    fn = ctx.name
    examples = ctx.io_examples
    left = {"static": budgets.static_rounds,
            "runtime": budgets.runtime_rounds,
            "semantic": budgets.semantic_rounds}
    rounds = Rounds()
    if current_code is None:
        current_code = filled.code_of(fn)

    while True:
        if candidate_problem is not None:
            category, evidence = "static", [candidate_problem]
        else:
            category, evidence = _diagnose(filled, fn, examples)
        if category is None:
            return StubOutcome(fn, filled.code_of(fn), rounds,
                               Status.SUCCESS, [], llm_calls)
        if left[category] == 0:
            return StubOutcome(fn, filled.code_of(fn), rounds,
                               _FAILURE_FOR[category], evidence, llm_calls)

        if category == "semantic":
            rctx = make_repair_context(ctx, current_code, mismatches=evidence)
            kind = RepairKind.SEMANTIC
        else:
            rctx = make_repair_context(ctx, current_code,
                                       diagnostics_text="\n\n".join(evidence))
            kind = RepairKind.STATIC if category == "static" \
                else RepairKind.RUNTIME
        messages = build_repair_messages(kind, rctx)

        left[category] -= 1
        setattr(rounds, category, getattr(rounds, category) + 1)
        llm_calls += 1
        try:
            code, _ = complete_code(gateway, GenerationRequest(
                tuple(messages), seed=seed, model_id=model_id))
        except GatewayError as e:
            return StubOutcome(fn, filled.code_of(fn), rounds,
                               _FAILURE_FOR[category],
                               [f"gateway: {e}"], llm_calls)
        try:
            current_code = replace_def(filled, fn, code)
            candidate_problem = None
        except BadCandidate as e:
            # keep the old code in the model; repair the unusable text
            current_code = code
            candidate_problem = str(e)


# the name shadows pytest's collection convention
test_and_repair.__test__ = False  # type: ignore[attr-defined]


def synthesize_stub(ir, doc: ModelDocument, task: StubTask, gateway: Gateway,
                    few_shot: FewShotSet,
                    budgets: Budgets | None = None) -> StubOutcome:
    """Generate one stub's implementation, then test-and-repair it.

    Reads and writes only the named stub: every other definition of the
    document is untouched regardless of what the gateway returns.
    """
    budgets = budgets or Budgets()
    stub = doc.stubs[task.fn_name]
    if not task.examples:
        raise IoSpecError(f"{task.fn_name}: at least one generation example "
                          "is required")
    for ex in task.examples:
        if len(ex.args) != len(stub.params):
            raise IoSpecError(
                f"{ex.label or ex.fn}: {len(ex.args)} argument(s) for a "
                f"{len(stub.params)}-parameter stub")

    ctx = make_stub_context(ir, doc, task.fn_name,
                            description=task.description,
                            io_examples=task.examples)
    filled = FilledModel(doc)
    messages = build_generation_messages(ctx, few_shot)
    try:
        code, _ = complete_code(gateway, GenerationRequest(
            tuple(messages), seed=task.seed, model_id=task.model_id))
    except GatewayError as e:
        return StubOutcome(task.fn_name, filled.code_of(task.fn_name),
                           Rounds(), Status.FAILED_STATIC,
                           [f"gateway: {e}"], llm_calls=1)
    try:
        current = replace_def(filled, task.fn_name, code)
        problem = None
    except BadCandidate as e:
        current, problem = code, str(e)
    return test_and_repair(ctx, filled, gateway, budgets,
                           seed=task.seed, model_id=task.model_id,
                           current_code=current, candidate_problem=problem,
                           llm_calls=1)
