"""Prompt assembly for generation and repair requests.

Templates are plain text with `@@@MACRO@@@` placeholders, expanded in a
single simultaneous pass: substituted values are never re-scanned, so
expansion of an already-expanded text is the identity. Few-shot
demonstrations are built at load time from a bundled reference contract
by running it through the same frontend and emitter as real targets.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .frontend import ContractIR, extract_handler_source, load_project
from .iospec import IoExample
from .stubber import ModelDocument, PureDef, emit_model, type_name_refs

log = logging.getLogger(__name__)

_MACRO_RE = re.compile(r"@@@([A-Z][A-Z0-9_() ]*?)@@@")

# types the modeling language provides without a definition
_BUILTIN_TYPE_NAMES = {"List", "Set", "Option", "Result"}


class UnboundMacro(Exception):
    def __init__(self, name: str, template: str):
        self.name = name
        self.template = template
        super().__init__(f"template {template} has no binding for @@@{name}@@@")


@dataclass(frozen=True)
class Template:
    name: str
    body: str

    @property
    def required_macros(self) -> frozenset[str]:
        return frozenset(_MACRO_RE.findall(self.body))


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad message role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class FewShotSet:
    system: ChatMessage
    demonstrations: tuple[tuple[ChatMessage, ChatMessage], ...]

    def __post_init__(self):
        if self.system.role != "system":
            raise ValueError("few-shot set must start with a system message")
        for q, a in self.demonstrations:
            if q.role != "user" or a.role != "assistant":
                raise ValueError("demonstrations must be (user, assistant) pairs")


def expand_template(template: Template, bindings: dict[str, str]) -> str:
    missing = template.required_macros - bindings.keys()
    if missing:
        raise UnboundMacro(sorted(missing)[0], template.name)
    for extra in sorted(bindings.keys() - template.required_macros):
        log.warning("binding %s is not used by template %s", extra, template.name)
    return _MACRO_RE.sub(lambda m: bindings[m.group(1)], template.body)


# -------------------------------------------------------------- type closure

def type_closure(model: ModelDocument, fn: PureDef) -> str:
    """Definitions of every type transitively referenced by fn's
    signature, dependencies first; unresolved names become comments."""
    defs = {td.name: td for td in model.type_defs}
    roots: list[str] = []
    for _, t in fn.params:
        roots.extend(type_name_refs(t))
    roots.extend(type_name_refs(fn.return_type))

    emitted: list[str] = []
    unresolved: list[str] = []
    done: set[str] = set()
    in_progress: set[str] = set()

    def visit(name: str) -> None:
        if name in done or name in in_progress or name in _BUILTIN_TYPE_NAMES:
            return
        td = defs.get(name)
        if td is None:
            if name not in unresolved:
                unresolved.append(name)
            done.add(name)
            return
        in_progress.add(name)
        for ref in td.refs:
            visit(ref)
        in_progress.discard(name)
        done.add(name)
        emitted.append(td.text)

    for root in roots:
        visit(root)

    parts = emitted + [f"// unresolved type: {n}" for n in unresolved]
    return "\n\n".join(parts)


# ----------------------------------------------------------- text fragments

def format_io_examples(examples: list[IoExample]) -> str:
    if not examples:
        return ""
    lines = [f"{ex.fn}({', '.join(ex.args)}) == {ex.expected}" for ex in examples]
    return ("The function must satisfy these input-output examples:\n\n"
            "```\n" + "\n".join(lines) + "\n```")


def format_handler_source(source: str) -> str:
    return f"```rust\n{source}\n```"


def format_mismatches(mismatches: list) -> str:
    """One block per mismatch: the input call, the incorrect output of
    the current implementation, and the user-specified expected output."""
    blocks = []
    for i, m in enumerate(mismatches, start=1):
        call = f"{m.fn}({', '.join(m.args)})"
        blocks.append(
            f"Example {i}:\n"
            f"- input arguments: `{call}`\n"
            f"- incorrect output of the current implementation: `{m.actual}`\n"
            f"- user-specified expected output: `{m.expected}`")
    return "\n\n".join(blocks)


def format_query_messages(ir: ContractIR) -> str:
    decl = ir.messages.get("QueryMsg")
    if decl is None:
        return "// the contract declares no query messages"
    lines = [f"pub enum {decl.name} {{"]
    for vname, payload in decl.variants:
        if payload is None:
            lines.append(f"    {vname},")
        elif isinstance(payload, str):
            lines.append(f"    {vname}({payload}),")
        else:
            fields = ", ".join(f"{fn}: {ft}" for fn, ft in payload)
            lines.append(f"    {vname} {{ {fields} }},")
    lines.append("}")
    return "\n".join(lines)


# ------------------------------------------------------------------ context

@dataclass
class StubContext:
    name: str
    stub_text: str
    type_definitions: str
    constants: str
    handler_source: str
    description: str = ""
    io_examples: list[IoExample] = field(default_factory=list)
    imports: str = ""
    extra_declarations: str = ""


@dataclass
class RepairContext:
    name: str
    current_code: str
    type_definitions: str
    constants: str
    description: str = ""
    diagnostics_text: str = ""
    mismatches: list = field(default_factory=list)
    extra_declarations: str = ""


class RepairKind(Enum):
    STATIC = "static"
    RUNTIME = "runtime"
    SEMANTIC = "semantic"


def make_stub_context(ir: ContractIR, doc: ModelDocument, fn_name: str,
                      description: str = "",
                      io_examples: list[IoExample] | None = None,
                      extra_declarations: str = "") -> StubContext:
    stub = doc.stubs[fn_name]
    return StubContext(
        name=fn_name,
        stub_text=stub.text,
        type_definitions=type_closure(doc, stub),
        constants="\n".join(doc.constants),
        handler_source=extract_handler_source(ir, fn_name),
        description=description,
        io_examples=list(io_examples or []),
        extra_declarations=extra_declarations,
    )


def make_repair_context(ctx: StubContext, current_code: str,
                        diagnostics_text: str = "",
                        mismatches: list | None = None) -> RepairContext:
    return RepairContext(
        name=ctx.name,
        current_code=current_code,
        type_definitions=ctx.type_definitions,
        constants=ctx.constants,
        description=ctx.description,
        diagnostics_text=diagnostics_text,
        mismatches=list(mismatches or []),
        extra_declarations=ctx.extra_declarations,
    )


# ----------------------------------------------------------- message builds

def build_generation_user(ctx: StubContext) -> ChatMessage:
    bindings = {
        "NAME": ctx.name,
        "DESCRIPTION": ctx.description,
        "STUB": ctx.stub_text,
        "QUINT TYPE DEFINITIONS": ctx.type_definitions,
        "CONSTANTS": ctx.constants,
        "DEC": ctx.extra_declarations,
        "QUINT IMPORTS": ctx.imports,
        "MESSAGE HANDLERS": format_handler_source(ctx.handler_source),
        "IO EXAMPLES": format_io_examples(ctx.io_examples),
    }
    return ChatMessage("user", expand_template(load_template("generate_user"),
                                               bindings))


def build_generation_messages(ctx: StubContext,
                              few_shot: FewShotSet) -> list[ChatMessage]:
    messages = [few_shot.system]
    for q, a in few_shot.demonstrations:
        messages.extend((q, a))
    messages.append(build_generation_user(ctx))
    return messages


def build_repair_messages(kind: RepairKind, ctx: RepairContext,
                          system: ChatMessage | None = None) -> list[ChatMessage]:
    if kind in (RepairKind.STATIC, RepairKind.RUNTIME):
        if not ctx.diagnostics_text:
            raise ValueError("repair requested without diagnostics")
        template = load_template("repair_static_user")
        bindings = {
            "NAME": ctx.name,
            "DESCRIPTION": ctx.description,
            "QUINT TYPE DEFINITIONS": ctx.type_definitions,
            "CONSTANTS": ctx.constants,
            "DEC": ctx.extra_declarations,
            "QUINT SHORT INSTRUCTIONS": load_short_instructions(),
            "ORIGINAL IMPLEMENTATION": ctx.current_code,
            "QUINT ERRORS": ctx.diagnostics_text,
        }
    elif kind is RepairKind.SEMANTIC:
        if not ctx.mismatches:
            raise ValueError("semantic repair requested without mismatches")
        template = load_template("repair_semantic_user")
        bindings = {
            "NAME": ctx.name,
            "DESCRIPTION": ctx.description,
            "QUINT TYPE DEFINITIONS": ctx.type_definitions,
            "CONSTANTS": ctx.constants,
            "DEC": ctx.extra_declarations,
            "QUINT SHORT INSTRUCTIONS": load_short_instructions(),
            "ORIGINAL IMPLEMENTATION": ctx.current_code,
            "IO MISMATCHES": format_mismatches(ctx.mismatches),
        }
    else:
        raise ValueError(f"unknown repair kind {kind!r}")
    user = ChatMessage("user", expand_template(template, bindings))
    return [system or load_system_message(), user]


def build_adapter_generation_messages(ir: ContractIR, stub_text: str,
                                      type_definitions: str) -> list[ChatMessage]:
    bindings = {
        "NAME": ir.name,
        "STUB": stub_text,
        "QUINT TYPE DEFINITIONS": type_definitions,
        "QUERY MESSAGES": format_query_messages(ir),
    }
    user = ChatMessage("user", expand_template(load_template("adapter_user"),
                                               bindings))
    return [load_system_message(), user]


def build_adapter_repair_messages(name: str, current_code: str,
                                  errors_text: str) -> list[ChatMessage]:
    if not errors_text:
        raise ValueError("adapter repair requested without errors")
    bindings = {
        "NAME": name,
        "ORIGINAL IMPLEMENTATION": current_code,
        "RUST ERRORS": errors_text,
    }
    user = ChatMessage("user", expand_template(
        load_template("repair_adapter_user"), bindings))
    return [load_system_message(), user]


def to_wire(messages: list[ChatMessage]) -> list[dict]:
    return [{"role": m.role, "content": m.content} for m in messages]


# ------------------------------------------------------------- data loading

_prompts_override: Path | None = None


def set_prompts_dir(path: str | Path | None) -> None:
    """Point the template loaders at a directory other than the bundled one.
    Pass None to restore the packaged prompts."""
    global _prompts_override
    _prompts_override = Path(path) if path else None


def _prompts_dir():
    if _prompts_override is not None:
        return _prompts_override
    return resources.files("quintsmith.data") / "prompts"


def load_template(name: str) -> Template:
    return Template(name, (_prompts_dir() / f"{name}.txt")
                    .read_text(encoding="utf-8"))


def load_short_instructions() -> str:
    return (_prompts_dir() / "short_instructions.txt") \
        .read_text(encoding="utf-8").strip()


def load_system_message() -> ChatMessage:
    return ChatMessage("system", (_prompts_dir() / "system.txt")
                       .read_text(encoding="utf-8").strip())


def default_demo_dir() -> Path:
    return Path(str(resources.files("quintsmith.data") / "demos" / "vault"))


def load_few_shot(demo_dir: str | Path | None = None,
                  io_count: int = 2) -> FewShotSet:
    """Build the demonstration pairs from a demo contract directory by
    running it through the same frontend and emitter as real targets."""
    demo_dir = Path(demo_dir) if demo_dir is not None else default_demo_dir()
    ir, _ = load_project(demo_dir)
    doc = emit_model(ir)
    spec = json.loads((demo_dir / "demo.json").read_text(encoding="utf-8"))
    pairs = []
    for fn in spec["functions"]:
        rows = spec.get("io_examples", {}).get(fn, [])[:io_count]
        examples = [IoExample(fn, [str(a) for a in r["args"]], str(r["expected"]))
                    for r in rows]
        ctx = make_stub_context(
            ir, doc, fn,
            description=spec.get("descriptions", {}).get(fn, ""),
            io_examples=examples)
        answer = (demo_dir / "answers" / f"{fn}.qnt") \
            .read_text(encoding="utf-8").strip()
        pairs.append((build_generation_user(ctx),
                      ChatMessage("assistant", f"```quint\n{answer}\n```")))
    return FewShotSet(load_system_message(), tuple(pairs))
