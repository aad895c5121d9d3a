"""Lexer for the modeling-language subset."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import PARSE, Diagnostic, ParseError

KEYWORDS = {
    "module", "import", "from", "type", "var", "val", "pure", "def",
    "action", "nondet", "if", "else", "match", "all", "any",
    "and", "or", "not",
}

# Multi-character operators first so maximal munch wins.
OPERATORS = [
    "...", "=>", "->", "==", "!=", "<=", ">=",
    "{", "}", "(", ")", "[", "]", ",", ":", ".", "|",
    "=", "<", ">", "+", "-", "*", "/", "%",
]


@dataclass
class Token:
    kind: str    # INT, STR, BOOL, LOW_ID, CAP_ID, UNDERSCORE, PRIME_ID, keyword, operator, EOF
    text: str    # lexeme as written (without quotes for STR, without prime for PRIME_ID)
    line: int    # 1-based
    col: int     # 1-based
    value: object = None  # decoded payload for INT/STR/BOOL
    offset: int = 0       # byte offset of the first character in the source

    def width(self) -> int:
        """Width in source characters (equals the raw lexeme length)."""
        if self.kind == "STR":
            return len(self.text) + 2
        if self.kind == "PRIME_ID":
            return len(self.text) + 1
        return max(1, len(self.text))


def lex(source: str, file: str = "<model>") -> list[Token]:
    """Tokenize source; raises ParseError on malformed input."""
    lines = source.splitlines()
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def err(msg: str, l: int, c: int, width: int = 1) -> ParseError:
        src = lines[l - 1] if 0 < l <= len(lines) else ""
        return ParseError(Diagnostic(PARSE, msg, file, l, c, width, src))

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise err("unterminated block comment", line, col)
            for j in range(i, end + 2):
                if source[j] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = end + 2
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise err("unterminated string literal", line, col)
                if source[j] == "\\":
                    if j + 1 >= n:
                        raise err("unterminated string literal", line, col)
                    esc = source[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                else:
                    out.append(source[j])
                    j += 1
            if j >= n:
                raise err("unterminated string literal", line, col)
            text = source[i + 1:j]
            toks.append(Token("STR", text, line, col, "".join(out), i))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            toks.append(Token("INT", text, line, col, int(text), i))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            start_off = i
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            start_col = col
            col += j - i
            i = j
            if i < n and source[i] == "'":
                toks.append(Token("PRIME_ID", text, line, start_col, None, start_off))
                i += 1
                col += 1
                continue
            if text in ("true", "false"):
                toks.append(Token("BOOL", text, line, start_col, text == "true", start_off))
            elif text in KEYWORDS:
                toks.append(Token(text, text, line, start_col, None, start_off))
            elif text == "_":
                toks.append(Token("UNDERSCORE", text, line, start_col, None, start_off))
            elif text[0].isupper():
                toks.append(Token("CAP_ID", text, line, start_col, None, start_off))
            else:
                toks.append(Token("LOW_ID", text, line, start_col, None, start_off))
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                toks.append(Token(op, op, line, col, None, i))
                i += len(op)
                col += len(op)
                break
        else:
            raise err(f"unexpected character {ch!r}", line, col)
    toks.append(Token("EOF", "", line, col, None, n))
    return toks
