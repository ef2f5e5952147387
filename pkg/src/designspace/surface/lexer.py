"""Tokenizer for the machine description language."""
from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset({
    "machine", "refines", "sees", "variables", "invariants", "initialisation",
    "event", "any", "when", "with", "then", "end",
    "context", "sets", "constants",
    "not", "or", "TRUE", "FALSE",
    "POW", "SIGMA", "dom", "card", "INT", "BOOL",
})

# longest first so maximal munch falls out of ordered matching
SYMBOLS = [
    ":=", "|->", "\\/", "<+", "**", "+->", "/=", "/:", "<=", ">=", "=>",
    "\\", "(", ")", "{", "}", ",", ":", "=", "<", ">", "+", "-", "&",
]


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "name" | "int" | "kw" | symbol text | "eof"
    text: str
    line: int
    col: int


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col


def lex(src: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "/" and src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            toks.append(Token("kw" if word in KEYWORDS else "name", word, line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Token(sym, sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise LexError(f"stray character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks
