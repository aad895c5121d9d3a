"""Prompt assembly.

The type-closure tests check the walker against an independent
reachability oracle that works on raw definition text (token scan +
fixpoint) rather than the precomputed reference lists the walker uses.
The demo-answer test is the self-hosting check: every bundled reference
answer is spliced into the emitted demo model and must actually produce
the outputs advertised in the demonstration prompts.
"""

import logging
import re
from pathlib import Path
from types import SimpleNamespace

import pytest

from quintsmith.frontend import load_project
from quintsmith.iospec import IoExample, IoMismatch
from quintsmith.kernel import Evaluator, parse_module, typecheck, values_equal
from quintsmith.prompting import (
    ChatMessage,
    FewShotSet,
    RepairKind,
    Template,
    UnboundMacro,
    build_adapter_generation_messages,
    build_adapter_repair_messages,
    build_generation_messages,
    build_generation_user,
    build_repair_messages,
    default_demo_dir,
    expand_template,
    format_io_examples,
    format_mismatches,
    format_query_messages,
    load_few_shot,
    load_system_message,
    load_template,
    make_repair_context,
    make_stub_context,
    to_wire,
    type_closure,
)
from quintsmith.stubber import PureDef, TypeDef, emit_model

FIXTURE = Path(__file__).parent / "fixtures" / "lockup"

_CAP = re.compile(r"\b([A-Z][A-Za-z0-9_]*)\b")


@pytest.fixture(scope="module")
def lockup():
    ir, _ = load_project(FIXTURE)
    return ir, emit_model(ir)


@pytest.fixture(scope="module")
def few_shot():
    return load_few_shot()


# ---------------------------------------------------------------- templates

def test_required_macros_collects_each_name_once():
    t = Template("t", "a @@@X@@@ b @@@QUINT TYPE DEFINITIONS@@@ c @@@X@@@")
    assert t.required_macros == {"X", "QUINT TYPE DEFINITIONS"}


def test_generation_template_macro_inventory():
    # the full binding set the generation builder must supply
    assert load_template("generate_user").required_macros == {
        "NAME", "DESCRIPTION", "STUB", "QUINT TYPE DEFINITIONS", "CONSTANTS",
        "DEC", "QUINT IMPORTS", "MESSAGE HANDLERS", "IO EXAMPLES",
    }


def test_expand_zero_macro_template_is_identity():
    body = "no placeholders here, not even half an @@ or a lone @@@.\n"
    assert expand_template(Template("t", body), {}) == body


def test_expand_missing_binding_raises_unbound_macro():
    t = Template("gen", "@@@NAME@@@ @@@IO EXAMPLES@@@")
    with pytest.raises(UnboundMacro) as exc:
        expand_template(t, {"NAME": "withdraw"})
    assert exc.value.name == "IO EXAMPLES"
    assert exc.value.template == "gen"


def test_expand_extra_binding_warns_but_succeeds(caplog):
    t = Template("t", "only @@@NAME@@@")
    with caplog.at_level(logging.WARNING, logger="quintsmith.prompting"):
        out = expand_template(t, {"NAME": "f", "UNUSED": "x"})
    assert out == "only f"
    assert any("UNUSED" in r.message for r in caplog.records)


def test_expand_is_single_pass():
    # a substituted value that looks like a macro is not re-scanned
    t = Template("t", "@@@A@@@ and @@@B@@@")
    assert expand_template(t, {"A": "@@@B@@@", "B": "x"}) == "@@@B@@@ and x"


def test_expanding_expanded_text_is_identity(lockup, caplog):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "withdraw", description="d")
    once = build_generation_user(ctx).content
    bindings = {m: "anything" for m in
                load_template("generate_user").required_macros}
    with caplog.at_level(logging.WARNING, logger="quintsmith.prompting"):
        again = expand_template(Template("idem", once), bindings)
    assert again == once


# ------------------------------------------------------------- type closure

def _reachable_defined(doc, fn):
    """Independent oracle: fixpoint over capitalized tokens in raw
    definition text, following only names that have a definition."""
    defs = {td.name: td.text for td in doc.type_defs}
    sig = " ".join(t for _, t in fn.params) + " " + fn.return_type
    frontier = {n for n in _CAP.findall(sig) if n in defs}
    seen = set(frontier)
    while frontier:
        step = set()
        for name in frontier:
            rhs = defs[name].split("=", 1)[1]
            step |= {t for t in _CAP.findall(rhs) if t in defs} - seen
        seen |= step
        frontier = step
    return seen


def _closure_def_names(closure: str) -> list[str]:
    return re.findall(r"^type ([A-Za-z0-9_]+) =", closure, re.M)


def test_closure_matches_reachability_oracle(lockup):
    ir, doc = lockup
    for fn_name in ("deposit", "withdraw", "instantiate"):
        stub = doc.stubs[fn_name]
        names = _closure_def_names(type_closure(doc, stub))
        assert len(names) == len(set(names)), fn_name
        assert set(names) == _reachable_defined(doc, stub), fn_name


def test_closure_has_no_unresolved_comments_for_lockup(lockup):
    ir, doc = lockup
    closure = type_closure(doc, doc.stubs["withdraw"])
    assert "unresolved" not in closure
    assert "type Lockup" in closure and "type ContractState" in closure


def test_closure_lists_dependencies_first(lockup):
    ir, doc = lockup
    closure = type_closure(doc, doc.stubs["withdraw"])
    names = _closure_def_names(closure)
    pos = {n: i for i, n in enumerate(names)}
    defs = {td.name: td.text for td in doc.type_defs}
    for n in names:
        rhs = defs[n].split("=", 1)[1]
        for dep in _CAP.findall(rhs):
            if dep in pos and dep != n:
                assert pos[dep] < pos[n], f"{dep} must precede {n}"


def test_closure_is_minimal(lockup):
    # every member is demanded by the signature or by another member
    ir, doc = lockup
    stub = doc.stubs["withdraw"]
    closure = type_closure(doc, stub)
    names = _closure_def_names(closure)
    defs = {td.name: td.text for td in doc.type_defs}
    sig_tokens = set(_CAP.findall(
        " ".join(t for _, t in stub.params) + " " + stub.return_type))
    for n in names:
        others = set()
        for m in names:
            if m != n:
                others |= set(_CAP.findall(defs[m].split("=", 1)[1]))
        assert n in sig_tokens | others, f"{n} is not demanded by anything"


def test_closure_of_int_only_signature_is_empty(lockup):
    ir, doc = lockup
    fn = PureDef("f", [("n", "int"), ("s", "str")], "int", "  n")
    assert type_closure(doc, fn) == ""


def test_closure_skips_builtin_container_names(lockup):
    ir, doc = lockup
    fn = PureDef("f", [("xs", "List[int]")], "Set[str]", "  Set()")
    assert type_closure(doc, fn) == ""


def test_closure_reports_unresolved_names_as_comments():
    doc = SimpleNamespace(type_defs=[TypeDef("A", "type A = Missing", ["Missing"])])
    fn = PureDef("f", [("a", "A")], "int", "  0")
    closure = type_closure(doc, fn)
    assert "type A = Missing" in closure
    assert "// unresolved type: Missing" in closure


def test_closure_emits_mutually_recursive_defs_once_each():
    doc = SimpleNamespace(type_defs=[
        TypeDef("A", "type A = List[B]", ["B"]),
        TypeDef("B", "type B = Option[A]", ["A"]),
    ])
    fn = PureDef("f", [("a", "A")], "int", "  0")
    closure = type_closure(doc, fn)
    assert closure.count("type A =") == 1
    assert closure.count("type B =") == 1
    assert type_closure(doc, fn) == closure  # stable across calls


# ------------------------------------------------------------ text fragments

def test_format_io_examples_golden():
    ex = IoExample("deposit", ["state0", "{ sender: \"a\", funds: [] }"], "Ok(0)")
    assert format_io_examples([ex]) == (
        "The function must satisfy these input-output examples:\n\n"
        "```\n"
        'deposit(state0, { sender: "a", funds: [] }) == Ok(0)\n'
        "```")
    assert format_io_examples([]) == ""


def test_format_single_mismatch_block():
    m = IoMismatch("deposit", ["s", "info"], "Err(\"x\")", "Ok(1)")
    text = format_mismatches([m])
    assert text.count("Example 1:") == 1
    assert "Example 2:" not in text
    assert "- input arguments: `deposit(s, info)`" in text
    assert '- incorrect output of the current implementation: `Err("x")`' in text
    assert "- user-specified expected output: `Ok(1)`" in text


def test_format_two_mismatches_are_numbered():
    ms = [IoMismatch("f", ["1"], "2", "3"), IoMismatch("f", ["4"], "5", "6")]
    text = format_mismatches(ms)
    assert "Example 1:" in text and "Example 2:" in text


def test_format_query_messages_reconstructs_enum(lockup):
    ir, _ = lockup
    text = format_query_messages(ir)
    assert text.startswith("pub enum QueryMsg {")
    assert "GetLockup { id: u64 }," in text


def test_format_query_messages_without_decl():
    ir = SimpleNamespace(messages={})
    assert format_query_messages(ir) == "// the contract declares no query messages"


# --------------------------------------------------------- message building

def test_generation_user_opens_with_stub_request(lockup):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "withdraw")
    content = build_generation_user(ctx).content
    assert content.startswith(
        "Please complete this stub for my `withdraw` Quint function.")
    assert doc.stubs["withdraw"].text in content
    assert "```rust" in content  # handler source rides along


def test_generation_messages_shape(lockup, few_shot):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "withdraw")
    messages = build_generation_messages(ctx, few_shot)
    assert len(messages) == 2 + 2 * len(few_shot.demonstrations)
    assert [m.role for m in messages[:2]] == ["system", "user"]
    roles = [m.role for m in messages]
    assert roles[0] == "system"
    assert roles[1:] == ["user", "assistant"] * len(few_shot.demonstrations) + ["user"]
    assert "withdraw" in messages[-1].content


def test_generation_messages_without_demos(lockup):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "deposit")
    messages = build_generation_messages(
        ctx, FewShotSet(load_system_message(), ()))
    assert [m.role for m in messages] == ["system", "user"]


def test_ablating_description_changes_only_that_region(lockup):
    ir, doc = lockup
    desc = "Withdraw the given lockups and send their coins back."
    with_desc = build_generation_user(
        make_stub_context(ir, doc, "withdraw", description=desc)).content
    without = build_generation_user(
        make_stub_context(ir, doc, "withdraw")).content
    i = next(k for k, (a, b) in enumerate(zip(with_desc, without)) if a != b)
    assert with_desc == without[:i] + desc + without[i:]


def test_repair_static_messages(lockup):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "withdraw")
    diag = ("withdraw_model.qnt:41:13 - error: [QNT000] "
            "mismatched input 'true' expecting {'_', LOW_ID, CAP_ID}")
    rctx = make_repair_context(ctx, "pure def withdraw(...) = ...",
                               diagnostics_text=diag)
    messages = build_repair_messages(RepairKind.STATIC, rctx)
    assert [m.role for m in messages] == ["system", "user"]
    body = messages[-1].content
    assert body.startswith("Please repair my `withdraw` Quint function "
                           "so that it no longer has Quint errors.")
    assert diag in body
    assert "pure def withdraw(...) = ..." in body


def test_runtime_repair_uses_error_template(lockup):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "deposit")
    rctx = make_repair_context(
        ctx, "code", diagnostics_text="[QNT507] Called 'get' with a non-existing key")
    body = build_repair_messages(RepairKind.RUNTIME, rctx)[-1].content
    assert "no longer has Quint errors" in body
    assert "QNT507" in body


def test_semantic_repair_messages(lockup):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "deposit")
    rctx = make_repair_context(
        ctx, "code",
        mismatches=[IoMismatch("deposit", ["a", "b"], "Err(\"no\")", "Ok(1)")])
    body = build_repair_messages(RepairKind.SEMANTIC, rctx)[-1].content
    assert "input-output specification" in body
    assert body.count("Example 1:") == 1


def test_repair_without_evidence_is_rejected(lockup):
    ir, doc = lockup
    ctx = make_stub_context(ir, doc, "deposit")
    rctx = make_repair_context(ctx, "code")
    for kind in (RepairKind.STATIC, RepairKind.RUNTIME, RepairKind.SEMANTIC):
        with pytest.raises(ValueError):
            build_repair_messages(kind, rctx)


def test_adapter_generation_messages(lockup):
    ir, _ = lockup
    stub = "fn compare_state(&mut self) { todo!() }"
    messages = build_adapter_generation_messages(ir, stub, "type Addr = str")
    assert [m.role for m in messages] == ["system", "user"]
    assert stub in messages[-1].content
    assert "GetLockup" in messages[-1].content


def test_adapter_repair_requires_errors():
    with pytest.raises(ValueError):
        build_adapter_repair_messages("lockup", "code", "")
    body = build_adapter_repair_messages(
        "lockup", "fn compare_state...", "error[E0308]: mismatched types")
    assert "error[E0308]" in body[-1].content


def test_to_wire_shape(few_shot):
    wire = to_wire([few_shot.system])
    assert wire == [{"role": "system", "content": few_shot.system.content}]


def test_chat_message_validation():
    with pytest.raises(ValueError):
        ChatMessage("tool", "x")
    with pytest.raises(ValueError):
        ChatMessage("user", "")
    with pytest.raises(ValueError):
        FewShotSet(ChatMessage("user", "x"), ())


# ------------------------------------------------------- bundled few-shot set

def test_few_shot_has_three_demonstrations(few_shot):
    assert len(few_shot.demonstrations) == 3
    q0 = few_shot.demonstrations[0][0].content
    assert q0.startswith(
        "Please complete this stub for my `instantiate` Quint function.")
    for q, a in few_shot.demonstrations:
        assert a.content.startswith("```quint\n")
        assert "pure def" in a.content


def test_few_shot_is_deterministic(few_shot):
    assert load_few_shot() == few_shot


def _splice(model_text: str, stub: PureDef, answer: str) -> str:
    indent = lambda s: "\n".join(
        "  " + l if l.strip() else l for l in s.splitlines())
    old = indent(stub.text)
    assert old in model_text
    return model_text.replace(old, indent(answer))


def test_demo_answers_satisfy_their_own_examples():
    """The bundled assistant answers must really compute the outputs the
    demonstrations promise, under the real checker."""
    import json

    demo_dir = default_demo_dir()
    ir, _ = load_project(demo_dir)
    doc = emit_model(ir)
    spec = json.loads((demo_dir / "demo.json").read_text(encoding="utf-8"))

    text = doc.text
    for fn in spec["functions"]:
        answer = (demo_dir / "answers" / f"{fn}.qnt").read_text(
            encoding="utf-8").strip()
        text = _splice(text, doc.stubs[fn], answer)

    module = parse_module(text, file="vault_demo.qnt")
    assert typecheck(module) == []
    ev = Evaluator(module)
    for fn in spec["functions"]:
        for row in spec["io_examples"][fn]:
            args = [ev.eval_expr(str(a)) for a in row["args"]]
            got = ev.call(fn, args)
            want = ev.eval_expr(str(row["expected"]))
            assert values_equal(got, want), (fn, row["args"])
