"""User-provided input/output specifications.

An example stores its arguments and expected result as expression
strings in the modeling language; they are parsed and evaluated against
the model when a check runs, so one spec file works for any candidate
implementation of the function.

The on-disk form is a JSON list of rows
`{function, label, args, expected, role}` where role is "generation"
(shown to the synthesizer) or "holdout" (reserved for scoring). When no
row in the file carries a role, the split falls back to file order: the
first `generation_count` rows of each function form the generation
slice and the rest are holdout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class IoSpecError(Exception):
    pass


@dataclass(frozen=True)
class IoExample:
    fn: str
    args: list[str]
    expected: str
    label: str = ""


@dataclass(frozen=True)
class IoMismatch:
    """A failed example: what the current implementation returned."""
    fn: str
    args: list[str]
    actual: str
    expected: str


@dataclass
class IoSpec:
    """Examples for one function, split into the generation slice (shown
    to the synthesizer) and the holdout slice (kept for inspection)."""
    fn: str
    generation: list[IoExample] = field(default_factory=list)
    holdout: list[IoExample] = field(default_factory=list)

    @property
    def all_examples(self) -> list[IoExample]:
        return self.generation + self.holdout


def _example(fn: str, row: dict, ordinal: int) -> IoExample:
    if not isinstance(row.get("args"), list) or "expected" not in row:
        raise IoSpecError(f"{fn}: example {ordinal} needs 'args' (list) and 'expected'")
    label = str(row.get("label") or f"{fn}/{ordinal}")
    return IoExample(fn, [str(a) for a in row["args"]], str(row["expected"]),
                     label)


def split_examples(fn: str, rows: list[dict], generation_count: int = 2) -> IoSpec:
    """Positional split: first `generation_count` rows are generation."""
    examples = [_example(fn, row, i) for i, row in enumerate(rows, start=1)]
    return IoSpec(fn, examples[:generation_count], examples[generation_count:])


def load_io_spec(path: str | Path, generation_count: int = 2) -> dict[str, IoSpec]:
    """Read a JSON manifest of example rows, grouped by function.

    Rows may set role to "generation" or "holdout"; a file where no row
    has a role is split positionally per function instead.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise IoSpecError("io spec must be a JSON list of example rows")

    by_fn: dict[str, list[dict]] = {}
    for i, row in enumerate(raw):
        if not isinstance(row, dict) or not isinstance(row.get("function"), str):
            raise IoSpecError(f"row {i}: every example row needs a 'function' name")
        role = row.get("role")
        if role not in (None, "generation", "holdout"):
            raise IoSpecError(f"row {i}: role must be 'generation' or 'holdout'")
        by_fn.setdefault(row["function"], []).append(row)

    explicit = any("role" in row for rows in by_fn.values() for row in rows)
    specs: dict[str, IoSpec] = {}
    for fn, rows in by_fn.items():
        if explicit:
            # absent role means generation in a role-carrying file
            gen = [_example(fn, r, i) for i, r in enumerate(rows, 1)
                   if r.get("role") != "holdout"]
            hold = [_example(fn, r, i) for i, r in enumerate(rows, 1)
                    if r.get("role") == "holdout"]
            specs[fn] = IoSpec(fn, gen, hold)
        else:
            specs[fn] = split_examples(fn, rows, generation_count)
    return specs
