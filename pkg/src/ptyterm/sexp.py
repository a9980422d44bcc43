"""Tokenizer and token stream shared by the type and derivation readers."""

from __future__ import annotations

import json
import re

_TOKEN = re.compile(r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<arrow>->)
  | (?P<punct>[()\[\]<>,.*])
  | (?P<atom>[^\s()\[\]<>,."*;]+)
""", re.VERBOSE)


class ReadError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class Tokens:
    def __init__(self, text: str):
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ReadError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            if kind == "punct":
                kind = m.group()
            elif kind == "arrow":
                kind = "->"
            if kind != "ws":
                value = m.group()
                if kind == "string":
                    value = json.loads(value)
                self.toks.append((kind, value, pos))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0

    def peek(self, offset: int = 0) -> tuple[str, str, int]:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def next(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ReadError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok[0] == kind and (value is None or tok[1] == value)

    def done(self) -> None:
        tok = self.peek()
        if tok[0] != "eof":
            raise ReadError(f"trailing input {tok[1]!r}", tok[2])


def quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)
