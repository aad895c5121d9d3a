"""Run configuration: defaults, JSON config files, flag overrides.

Precedence is defaults < config file < command-line flags.  The API token
is deliberately not a config field; the live backend reads it from the
environment so it can never end up committed inside a config file.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

from .repair import Budgets

BACKENDS = ("live", "replay", "scripted")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    project: str
    io_spec: str = ""
    prompts_dir: str = ""
    backend: str = "replay"
    endpoint: str = ""
    model_id: str = "offline"
    seed: int = 0
    static_rounds: int = 3
    runtime_rounds: int = 3
    semantic_rounds: int = 3
    runs: int = 5
    generation_count: int = 2    # leading io examples used for prompting
    out: str = "out"
    transcript: str = ""         # replay source, or record target
    record: bool = False
    no_descriptions: bool = False
    max_steps: int = 20          # simulated trace length

    def __post_init__(self):
        if not self.project:
            raise ConfigError("a project directory is required")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r} "
                              f"(choose from {', '.join(BACKENDS)})")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.generation_count < 1:
            raise ConfigError("generation_count must be at least 1")
        if self.max_steps < 0:
            raise ConfigError("max_steps must not be negative")
        for name in ("static_rounds", "runtime_rounds", "semantic_rounds"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must not be negative")

    def budgets(self) -> Budgets:
        return Budgets(self.static_rounds, self.runtime_rounds,
                       self.semantic_rounds)

    def to_jsonable(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {
    "project": str, "io_spec": str, "prompts_dir": str, "backend": str,
    "endpoint": str, "model_id": str, "seed": int, "static_rounds": int,
    "runtime_rounds": int, "semantic_rounds": int, "runs": int,
    "generation_count": int, "out": str, "transcript": str, "record": bool,
    "no_descriptions": bool, "max_steps": int,
}
assert set(_FIELD_TYPES) == {f.name for f in fields(RunConfig)}


def load_config_file(path) -> dict:
    """One flat JSON object whose keys are RunConfig field names."""
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: the config must be a JSON object")
    for key, value in data.items():
        want = _FIELD_TYPES.get(key)
        if want is None:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if not isinstance(value, want) or \
                (want is int and isinstance(value, bool)):
            raise ConfigError(f"{path}: {key} must be a {want.__name__}")
    return data


def make_config(file_values: dict | None = None, **overrides) -> RunConfig:
    """Merge defaults, config-file values and flag overrides (None skipped)."""
    merged: dict = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(merged) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    try:
        return RunConfig(**merged)
    except TypeError as e:
        raise ConfigError(str(e)) from e
