"""Diagnostics for the modeling-language kernel.

Codes follow the convention used by Quint tooling: QNT000 for parse
errors, QNT0xx for static (name/type) errors, QNT5xx for runtime errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field


PARSE = "QNT000"
NAME_ERROR = "QNT001"
TYPE_MISMATCH = "QNT002"
ARITY_ERROR = "QNT003"
DUPLICATE_DEF = "QNT004"
FIELD_ERROR = "QNT005"
MODE_ERROR = "QNT006"
MATCH_ERROR = "QNT007"
RUNTIME_GENERIC = "QNT500"
MISSING_KEY = "QNT507"
INDEX_RANGE = "QNT510"
DIV_BY_ZERO = "QNT511"
NO_MATCH_ARM = "QNT505"


@dataclass
class Diagnostic:
    """One reported problem, with enough location data to render a caret."""

    code: str
    message: str
    file: str = "<model>"
    line: int = 0          # 1-based; 0 means no location
    col: int = 0           # 1-based column of the offending token
    width: int = 1         # caret width in columns
    source_line: str = ""  # text of the offending line, no newline

    def is_runtime(self) -> bool:
        return self.code.startswith("QNT5")

    def header(self) -> str:
        if self.line:
            return f"{self.file}:{self.line}:{self.col} - error: [{self.code}] {self.message}"
        return f"error: [{self.code}] {self.message}"

    def _caret_width(self) -> int:
        room = len(self.source_line) - self.col + 1
        return max(1, min(self.width, room))

    def render(self) -> str:
        """Multi-line rendering: header, offending line, caret underline."""
        parts = [self.header()]
        if self.line and self.source_line:
            prefix = f"{self.line}: "
            parts.append(prefix + self.source_line)
            pad = " " * (len(prefix) + self.col - 1)
            parts.append(pad + "^" * self._caret_width())
        return "\n".join(parts)

    def render_runtime(self) -> str:
        """Runtime flavor: no file position header, caret under the expression."""
        parts = [f"runtime error: error: [{self.code}] {self.message}"]
        if self.source_line:
            parts.append(self.source_line.strip())
            shift = len(self.source_line) - len(self.source_line.lstrip())
            parts.append(" " * max(0, self.col - 1 - shift) + "^" * self._caret_width())
        return "\n".join(parts)


def render_all(diags: list[Diagnostic]) -> str:
    return "\n\n".join(d.render() for d in diags)


@dataclass
class KernelError(Exception):
    """Raised for errors that abort an operation (parse failure, runtime error)."""

    diagnostic: Diagnostic

    def __str__(self) -> str:
        return self.diagnostic.header()


class ParseError(KernelError):
    pass


class RuntimeEvalError(KernelError):
    pass
