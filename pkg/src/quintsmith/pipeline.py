"""The five pipeline commands: stub, generate, adapter, bench, replay.

Each run_* function returns a process exit code and raises ConfigError,
SubsetViolation, IoSpecError or GatewayError for setup problems the CLI
turns into error messages.  Tests inject gateways and build checkers
directly; the CLI builds them from the run configuration.
"""

from __future__ import annotations

import json
import logging
import subprocess
import tempfile
from pathlib import Path

from . import prompting
from .config import ConfigError, RunConfig
from .frontend import ContractIR, load_project
from .gateway import (
    Gateway, GatewayError, GenerationRequest, GenerationResponse,
    LiveGateway, ReplayGateway, TranscriptRecorder, complete_code,
)
from .iospec import IoSpec, load_io_spec
from .kernel import RuntimeEvalError, parse_module
from .prompting import (
    build_adapter_generation_messages, build_adapter_repair_messages,
    load_few_shot, type_closure,
)
from .repair import (
    FilledModel, Status, StubTask, check_semantics, replace_def,
    runtime_failures, synthesize_stub,
)
from .report import build_report, format_report
from .simulate import (
    DivergenceAt, SchemaError, SimulateError, load_trace, replay_trace,
    simulate, write_trace,
)
from .stubber import ModelDocument, emit_adapter_stub, emit_model

log = logging.getLogger(__name__)

TRACE_FILE = "traces/trace.json"


class _Provenance:
    """Delegating gateway wrapper that remembers response provenance."""

    def __init__(self, inner: Gateway):
        self.inner = inner
        self.backend = inner.backend
        self.events: list[GenerationResponse] = []

    def complete(self, req: GenerationRequest) -> GenerationResponse:
        resp = self.inner.complete(req)
        self.events.append(resp)
        return resp


def build_gateway(cfg: RunConfig) -> Gateway:
    if cfg.backend == "live":
        if not cfg.endpoint:
            raise ConfigError("the live backend needs an endpoint")
        return LiveGateway(cfg.endpoint)
    if cfg.backend == "replay":
        if not cfg.transcript:
            raise ConfigError("the replay backend needs a transcript file")
        return ReplayGateway(cfg.transcript)
    raise ConfigError("the scripted backend can only be injected in code")


def handler_description(ir: ContractIR, name: str) -> str:
    for h in ir.handlers:
        if h.name == name:
            return "\n".join(line.lstrip("/").strip()
                             for line in h.doc).strip()
    return ""


def _eval_holdout(model_text: str, fn: str, examples) -> tuple[int, list[str]]:
    """(passed, failures) for one function's holdout examples; a crash on an
    example counts against it the same as a wrong value."""
    module = parse_module(model_text, file="<model>")
    failures: list[str] = []
    for ex in examples:
        crashes = runtime_failures(module, fn, [ex])
        if crashes:
            failures.append(crashes[0])
            continue
        for (_args, expected), actual in check_semantics(module, fn,
                                                         [ex]).items():
            failures.append(f"{ex.label}: expected {expected}, got {actual}")
    return len(examples) - len(failures), failures


def generate_functions(ir: ContractIR, doc: ModelDocument,
                       specs: dict[str, IoSpec], gateway: Gateway,
                       cfg: RunConfig, seed: int) -> tuple[dict, FilledModel]:
    """Synthesize every stub that has io examples; returns the per-function
    records and the merged model."""
    few_shot = load_few_shot()
    wrapped = _Provenance(gateway)
    merged = FilledModel(doc)
    functions: dict[str, dict] = {}
    for name in doc.stubs:
        spec = specs.get(name)
        if spec is None or not spec.generation:
            log.warning("%s has no io examples; its stub body is kept", name)
            functions[name] = {"status": "skipped",
                               "reason": "no io examples"}
            continue
        mark = len(wrapped.events)
        task = StubTask(
            name,
            description=("" if cfg.no_descriptions
                         else handler_description(ir, name)),
            examples=spec.generation, seed=seed, model_id=cfg.model_id)
        outcome = synthesize_stub(ir, doc, task, wrapped, few_shot,
                                  cfg.budgets())
        events = wrapped.events[mark:]
        replace_def(merged, name, outcome.final_code)

        passed, hold_failures, total = 0, [], 0
        if outcome.status is Status.SUCCESS and spec.holdout:
            single = FilledModel(doc)
            replace_def(single, name, outcome.final_code)
            total = len(spec.holdout)
            passed, hold_failures = _eval_holdout(single.text(), name,
                                                  spec.holdout)

        record = outcome.to_jsonable()
        record["rounds"] = record.pop("rounds_used")
        record.update({
            "holdout_passed": passed,
            "holdout_total": total,
            "holdout_failures": hold_failures,
            "fingerprints": [r.system_fingerprint for r in events
                             if r.system_fingerprint],
            "timestamps": [r.timestamp for r in events],
        })
        functions[name] = record
    return functions, merged


def _setup(cfg: RunConfig):
    if cfg.prompts_dir:
        prompting.set_prompts_dir(cfg.prompts_dir)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ir, model_cfg = load_project(cfg.project)
    return out, ir, model_cfg


def _generation_inputs(cfg: RunConfig, gateway: Gateway | None):
    out, ir, model_cfg = _setup(cfg)
    doc = emit_model(ir, model_cfg)
    if not cfg.io_spec:
        raise ConfigError("an io-spec file is required")
    specs = load_io_spec(cfg.io_spec, cfg.generation_count)
    unknown = sorted(set(specs) - set(doc.stubs))
    if unknown:
        raise ConfigError(f"the io-spec names unknown functions: "
                          f"{', '.join(unknown)}")
    if gateway is None:
        gateway = build_gateway(cfg)
    if cfg.record:
        path = out / "transcripts.jsonl"
        if cfg.backend == "replay" and cfg.transcript \
                and Path(cfg.transcript).resolve() == path.resolve():
            raise ConfigError("recording would overwrite the transcript "
                              "being replayed; pick another --out")
        path.unlink(missing_ok=True)
        gateway = TranscriptRecorder(gateway, path)
    return out, ir, doc, specs, gateway


# ---------------------------------------------------------------- commands

def run_stub(cfg: RunConfig) -> int:
    """Write the mechanical model and adapter stubs.  Deterministic and
    idempotent: rerunning on the same sources rewrites the same bytes."""
    out, ir, model_cfg = _setup(cfg)
    doc = emit_model(ir, model_cfg)
    adapter = emit_adapter_stub(ir, model_cfg)
    (out / "model.qnt").write_text(doc.text, encoding="utf-8")
    (out / "adapter.txt").write_text(adapter.test_source, encoding="utf-8")
    for note in doc.notes:
        log.warning("%s", note)
    print(f"wrote {out / 'model.qnt'} ({len(doc.stubs)} stub(s)) "
          f"and {out / 'adapter.txt'}")
    return 0


def run_generate(cfg: RunConfig, gateway: Gateway | None = None) -> int:
    """One full generation pass: synthesize, merge, simulate, report."""
    out, ir, doc, specs, gateway = _generation_inputs(cfg, gateway)
    functions, merged = generate_functions(ir, doc, specs, gateway, cfg,
                                           cfg.seed)
    model_text = merged.text()
    (out / "model.qnt").write_text(model_text, encoding="utf-8")

    notes = list(doc.notes)
    trace_path = None
    try:
        trace = simulate(model_text, doc, steps=cfg.max_steps, seed=cfg.seed)
        (out / "traces").mkdir(exist_ok=True)
        write_trace(trace, out / TRACE_FILE)
        trace_path = TRACE_FILE
    except (SimulateError, RuntimeEvalError) as e:
        # a model with failed functions may not typecheck or may crash
        # mid-walk; the trace is an extra artifact, not a gate
        notes.append(f"simulation skipped: {e}")
        log.warning("simulation skipped: %s", e)

    outcomes = {
        "contract": ir.name,
        "model_id": cfg.model_id,
        "backend": cfg.backend,
        "seed": cfg.seed,
        "budgets": cfg.budgets().__dict__,
        "generation_count": cfg.generation_count,
        "functions": functions,
        "trace": trace_path,
        "notes": notes,
    }
    with open(out / "outcomes.json", "w", encoding="utf-8") as f:
        json.dump(outcomes, f, indent=2)
        f.write("\n")

    failed = [n for n, r in functions.items()
              if r["status"].startswith("failed")]
    for name in failed:
        log.warning("%s: %s", name, functions[name]["status"])
    print(f"wrote {out / 'model.qnt'} and {out / 'outcomes.json'}"
          + (f"; {len(failed)} function(s) failed" if failed else ""))
    return 1 if failed else 0


def run_bench(cfg: RunConfig, gateway: Gateway | None = None) -> int:
    """cfg.runs generation passes; run r uses seed cfg.seed + r."""
    out, ir, doc, specs, gateway = _generation_inputs(cfg, gateway)
    records = []
    for r in range(1, cfg.runs + 1):
        seed = cfg.seed + r
        functions, _merged = generate_functions(ir, doc, specs, gateway,
                                                cfg, seed)
        records.append({"run": r, "seed": seed, "functions": functions})

    report = build_report(ir.name, cfg.model_id, cfg.seed, records)
    with open(out / "report.json", "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
    text = format_report(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    with open(out / "outcomes.json", "w", encoding="utf-8") as f:
        json.dump({"contract": ir.name, "model_id": cfg.model_id,
                   "base_seed": cfg.seed, "runs": records}, f, indent=2)
        f.write("\n")
    print(text, end="")
    return 0


class NullBuildCheck:
    """Accepts any adapter source; used when no Rust toolchain is wired in."""

    def check(self, source: str) -> list[str]:
        return []


class ExternalBuildCheck:
    """Run ``argv + [path]`` on the adapter source; nonzero exit means the
    output lines are the build errors."""

    def __init__(self, argv: list[str], timeout: float = 300.0):
        self.argv = list(argv)
        self.timeout = timeout

    def check(self, source: str) -> list[str]:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "adapter.rs"
            path.write_text(source, encoding="utf-8")
            proc = subprocess.run(self.argv + [str(path)],
                                  capture_output=True, text=True,
                                  timeout=self.timeout)
        if proc.returncode == 0:
            return []
        text = (proc.stdout + "\n" + proc.stderr).strip()
        return [text or f"build check failed (exit {proc.returncode})"]


def _adapter_type_defs(doc: ModelDocument) -> str:
    for stub in doc.stubs.values():
        return type_closure(doc, stub)
    return "\n\n".join(t.text for t in doc.type_defs)


def run_adapter(cfg: RunConfig, gateway: Gateway | None = None,
                build_check=None) -> int:
    """Write the adapter harness; with a backend, have the model write
    compare_state and repair it against the pluggable build check."""
    out, ir, model_cfg = _setup(cfg)
    adapter = emit_adapter_stub(ir, model_cfg)
    target = out / "adapter.txt"

    if gateway is None:
        try:
            gateway = build_gateway(cfg)
        except ConfigError:
            gateway = None  # not configured: keep the stub
    if gateway is None:
        target.write_text(adapter.test_source, encoding="utf-8")
        print(f"wrote {target} (stub compare_state)")
        return 0

    build_check = build_check or NullBuildCheck()
    doc = emit_model(ir, model_cfg)
    start, end = adapter.compare_state_span
    stub_text = adapter.test_source[start:end]
    messages = build_adapter_generation_messages(
        ir, stub_text, _adapter_type_defs(doc))
    try:
        code, _ = complete_code(gateway, GenerationRequest(
            tuple(messages), seed=cfg.seed, model_id=cfg.model_id))
    except GatewayError as e:
        target.write_text(adapter.test_source, encoding="utf-8")
        log.warning("adapter generation failed (%s); stub kept", e)
        return 1

    rounds = 0
    while True:
        if "fn compare_state(" not in code:
            errors = ["error: the reply must define `fn compare_state`"]
        else:
            spliced = (adapter.test_source[:start] + code
                       + adapter.test_source[end:])
            errors = build_check.check(spliced)
        if not errors or rounds >= cfg.static_rounds:
            break
        rounds += 1
        try:
            code, _ = complete_code(gateway, GenerationRequest(
                tuple(build_adapter_repair_messages(
                    ir.name, code, "\n\n".join(errors))),
                seed=cfg.seed, model_id=cfg.model_id))
        except GatewayError as e:
            errors.append(f"gateway: {e}")
            break

    if "fn compare_state(" in code:
        final = adapter.test_source[:start] + code + adapter.test_source[end:]
    else:
        final = adapter.test_source
        errors = errors or ["error: no usable compare_state was produced"]
    target.write_text(final, encoding="utf-8")
    if errors:
        log.warning("adapter build check still failing:\n%s",
                    "\n".join(errors))
        print(f"wrote {target} (build check failing)")
        return 1
    print(f"wrote {target}")
    return 0


def run_replay(model_path: str, trace_path: str) -> int:
    model_text = Path(model_path).read_text(encoding="utf-8")
    try:
        trace = load_trace(trace_path)
        lines = replay_trace(model_text, trace)
    except DivergenceAt as e:
        print(e)
        return 1
    except (SchemaError, SimulateError) as e:
        print(f"error: {e}")
        return 2
    for line in lines:
        print(line)
    print(f"trace is consistent with the model "
          f"({len(trace['states'])} step(s))")
    return 0
