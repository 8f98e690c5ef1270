"""Tokenizer shared by the core and surface dialects.

Comments are `//` to end of line and `/* ... */` (non-nesting).  Typed
literals `kind<lexeme>` and special literals `special<kind>` are scanned as
single tokens; `#name` is a single tag-query token.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Optional

from .errors import ParseError
from .values import LITERAL_KINDS

KEYWORDS = frozenset([
    "where", "end", "if", "then", "else", "and", "or", "not", "mod",
    "true", "false", "dimension", "default", "special", "isspecial",
]) | frozenset(LITERAL_KINDS)

# longest first so <= beats <
PUNCTUATION = ("<=", ">=", "<>", "(", ")", "{", "}", ",", ":", ";",
               "@", ".", "+", "-", "*", "/", "<", ">", "=")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
# a dot must be followed by a digit so "0.m()" lexes as a member call
_NUMBER_RE = re.compile(r"(\d+\.\d+|\.\d+|\d+)([eE][+-]?\d+)?")
_STRING_RE = re.compile(r'"(?:[^"\\\n]|\\.)*"')


@dataclass(frozen=True)
class Token:
    type: str          # punctuation/keyword literal, or one of the names below
    value: Any         # ident/number text, (kind, lexeme) for typed, etc.
    line: int
    column: int

    def describe(self) -> str:
        if self.type == "eof":
            return "end of input"
        if self.type in ("ident", "int", "float", "string", "typed", "hash"):
            return f"{self.type} {self.value!r}"
        return repr(self.type)


class Lexer:
    def __init__(self, source: str, filename: Optional[str] = None,
                 first_line: int = 1):
        self.source = source
        self.filename = filename
        self.pos = 0
        self.line = first_line
        self.col = 1

    def error(self, message: str):
        raise ParseError(message, self.line, self.col)

    def _advance(self, n: int):
        chunk = self.source[self.pos:self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = n - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def _skip_trivia(self):
        src = self.source
        while self.pos < len(src):
            ch = src[self.pos]
            if ch.isspace():
                self._advance(1)
            elif src.startswith("//", self.pos):
                end = src.find("\n", self.pos)
                self._advance((end if end != -1 else len(src)) - self.pos)
            elif src.startswith("/*", self.pos):
                end = src.find("*/", self.pos + 2)
                if end == -1:
                    self.error("unterminated block comment")
                self._advance(end + 2 - self.pos)
            else:
                return

    def tokens(self) -> list:
        out = []
        while True:
            tok = self.next_token()
            out.append(tok)
            if tok.type == "eof":
                return out

    def next_token(self) -> Token:
        self._skip_trivia()
        src, start = self.source, self.pos
        line, col = self.line, self.col
        if start >= len(src):
            return Token("eof", None, line, col)

        ch = src[start]
        if ch == "#":
            m = _IDENT_RE.match(src, start + 1)
            if not m:
                self.error("expected a dimension name after #")
            self._advance(1 + len(m.group(0)))
            return Token("hash", m.group(0), line, col)

        if ch == '"':
            m = _STRING_RE.match(src, start)
            if not m:
                self.error("unterminated string literal")
            self._advance(len(m.group(0)))
            try:
                text = json.loads(m.group(0))
            except ValueError:
                raise ParseError("bad escape in string literal", line, col) from None
            return Token("string", text, line, col)

        m = _NUMBER_RE.match(src, start)
        if m and (ch.isdigit() or ch == "."):
            text = m.group(0)
            self._advance(len(text))
            kind = "float" if ("." in text or "e" in text or "E" in text) else "int"
            return Token(kind, text, line, col)

        m = _IDENT_RE.match(src, start)
        if m:
            name = m.group(0)
            self._advance(len(name))
            if name in LITERAL_KINDS and self.pos < len(src) and src[self.pos] == "<":
                return self._angle_literal("typed", name, line, col)
            if name == "special" and self.pos < len(src) and src[self.pos] == "<":
                return self._angle_literal("speciallit", name, line, col)
            if name == "isspecial" and self.pos < len(src) and src[self.pos] == "<":
                return self._angle_literal("isspecial", name, line, col)
            if name == "isspecial":
                # bare form: value None distinguishes it from a kind payload
                return Token(name, None, line, col)
            if name in KEYWORDS:
                return Token(name, name, line, col)
            return Token("ident", name, line, col)

        for punct in PUNCTUATION:
            if src.startswith(punct, start):
                self._advance(len(punct))
                return Token(punct, punct, line, col)

        self.error(f"unexpected character {ch!r}")

    def _angle_literal(self, toktype: str, kind: str, line: int, col: int) -> Token:
        # positioned on '<'; the payload runs to the next '>' on this line
        src = self.source
        close = src.find(">", self.pos + 1)
        newline = src.find("\n", self.pos + 1)
        if close == -1 or (newline != -1 and newline < close):
            self.error(f"unterminated {kind}<...> literal")
        lexeme = src[self.pos + 1:close]
        self._advance(close + 1 - self.pos)
        if toktype == "typed":
            return Token("typed", (kind, lexeme), line, col)
        return Token(toktype, lexeme, line, col)


def tokenize(source: str, filename: Optional[str] = None,
             first_line: int = 1) -> list:
    return Lexer(source, filename, first_line).tokens()
