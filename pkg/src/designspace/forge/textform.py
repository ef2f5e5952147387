"""Textual pipeline form.

    Apply (<op> [andApply <op>]*) On <model-id>
        [WithActiveElements (Event(x), Variable(y), Invariant(z), ...)]

This is the form the CLI and API accept for one-shot generation. Only
andApply chains of atomic operators can be written this way; the richer
combinators are built programmatically. Singular operator spellings
(mergeEvent, combineEvent) are accepted as aliases.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce

from .operators import OPERATORS
from .pipeline import AndApply, Atomic, Focus, ForgeError, Pipeline

_ALIASES = {
    "mergeEvent": "mergeEvents",
    "combineEvent": "combineEvents",
    "deleteVariables": "deleteVariable",
}

_TOKEN = re.compile(r"\s+|\(|\)|,|[A-Za-z_][A-Za-z0-9_.-]*")
_CATEGORIES = {"Event": "events", "Variable": "variables", "Invariant": "invariants"}


@dataclass(frozen=True)
class ParsedPipeline:
    pipeline: Pipeline
    model_id: str
    focus: Focus


class _Tokens:
    def __init__(self, text: str):
        self.items: list[str] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ForgeError(f"unexpected character {text[pos]!r} in pipeline text")
            if not m.group().isspace():
                self.items.append(m.group())
            pos = m.end()
        self.pos = 0

    def peek(self) -> str | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def take(self, what: str = "more input") -> str:
        tok = self.peek()
        if tok is None:
            raise ForgeError(f"pipeline text ended early, expected {what}")
        self.pos += 1
        return tok

    def expect(self, literal: str) -> None:
        tok = self.peek()
        if tok is None:
            raise ForgeError(f"pipeline text ended early, expected {literal!r}")
        if tok != literal:
            raise ForgeError(f"expected {literal!r}, found {tok!r}")
        self.pos += 1


def _operator_name(tok: str) -> str:
    name = _ALIASES.get(tok, tok)
    if name not in OPERATORS:
        raise ForgeError(f"unknown operator {tok!r}")
    return name


def parse_pipeline(text: str) -> ParsedPipeline:
    ts = _Tokens(text)
    ts.expect("Apply")
    parenthesised = ts.peek() == "("
    if parenthesised:
        ts.expect("(")
    ops = [Atomic(_operator_name(ts.take("an operator")))]
    while ts.peek() == "andApply":
        ts.take()
        ops.append(Atomic(_operator_name(ts.take("an operator"))))
    if parenthesised:
        ts.expect(")")
    ts.expect("On")
    model_id = ts.take("a model id")

    sets: dict[str, list[str]] = {"events": [], "variables": [], "invariants": []}
    if ts.peek() == "WithActiveElements":
        ts.take()
        ts.expect("(")
        while True:
            cat = ts.take("Event/Variable/Invariant")
            if cat not in _CATEGORIES:
                raise ForgeError(f"unknown focus category {cat!r}")
            ts.expect("(")
            sets[_CATEGORIES[cat]].append(ts.take("an entity name"))
            ts.expect(")")
            if ts.peek() == ",":
                ts.take()
                continue
            break
        ts.expect(")")
    if ts.peek() is not None:
        raise ForgeError(f"trailing input in pipeline text: {ts.peek()!r}")

    pipeline = reduce(AndApply, ops[1:], ops[0])
    focus = Focus(events=tuple(sets["events"]),
                  variables=tuple(sets["variables"]),
                  invariants=tuple(sets["invariants"]))
    return ParsedPipeline(pipeline, model_id, focus)
