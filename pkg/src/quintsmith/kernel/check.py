"""Static checking entry points.

BuiltinChecker runs the bundled parser and typechecker. ExternalChecker
shells out to any tool that prints diagnostics in the standard
``file:line:col - error: [CODE] message`` shape, so an external analyzer
can be swapped in without touching the repair loop.
"""

from __future__ import annotations

import re
import subprocess
import tempfile
from pathlib import Path

from . import syntax as S
from .diagnostics import Diagnostic, ParseError
from .parser import parse_module
from .typecheck import typecheck

_DIAG_RE = re.compile(
    r"^(?P<file>[^:\n]+):(?P<line>\d+):(?P<col>\d+) - error: "
    r"\[(?P<code>QNT\d+)\] (?P<message>.*)$"
)


class BuiltinChecker:
    """Parse and typecheck with the in-process kernel."""

    def __init__(self, libs: list[S.Module] | None = None):
        self.libs = libs or []

    def check(self, source: str, file: str = "<model>") -> list[Diagnostic]:
        try:
            module = parse_module(source, file)
        except ParseError as exc:
            return [exc.diagnostic]
        return typecheck(module, self.libs)


class ExternalChecker:
    """Invoke an external analyzer on a temp file and parse its report.

    The command is run as ``argv + [path]``; any line of stdout or stderr
    matching the standard diagnostic header becomes a Diagnostic. A
    nonzero exit with no parseable lines is reported as one opaque
    QNT000 so failures never pass silently.
    """

    def __init__(self, argv: list[str], timeout: float = 60.0):
        self.argv = list(argv)
        self.timeout = timeout

    def check(self, source: str, file: str = "<model>") -> list[Diagnostic]:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "model.qnt"
            path.write_text(source)
            proc = subprocess.run(
                self.argv + [str(path)], capture_output=True, text=True,
                timeout=self.timeout,
            )
        out = []
        lines = source.splitlines()
        for raw in (proc.stdout + "\n" + proc.stderr).splitlines():
            m = _DIAG_RE.match(raw.strip())
            if not m:
                continue
            line = int(m.group("line"))
            out.append(Diagnostic(
                m.group("code"), m.group("message"), file, line,
                int(m.group("col")),
                source_line=lines[line - 1] if 0 < line <= len(lines) else "",
            ))
        if proc.returncode != 0 and not out:
            out.append(Diagnostic(
                "QNT000",
                f"external checker failed (exit {proc.returncode})", file))
        return out
