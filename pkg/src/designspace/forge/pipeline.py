"""Pipelines: how atomic operators compose into design moves.

A pipeline is a tree of combinators over atomic operators. Running it
against a project yields alternatives, each carrying the full list of
(operator, bindings) steps that produced it, plus a log of candidates
that were discarded along the way and why. Alternatives are never
deduplicated: two binding orders that reach the same machine are two
different design moves. Output order is the lexicographic order of
provenance, so runs are reproducible.

Event-creating stages thread: when mergeEvents or combineEvents makes
an event, later event-scoped stages in the same pipeline bind to that
event rather than fanning out over the whole machine again.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Union

from ..kernel.check import project_problems
from ..kernel.model import Project
from .conditions import eval_condition
from .operators import OPERATORS, OpContext
from .reversal import DEFAULT_REVERSAL, ReversalConfig

ITERATION_CAP = 8


class ForgeError(Exception):
    """A pipeline or focus that cannot be run at all."""


@dataclass(frozen=True)
class Focus:
    """Restriction of operator bindings to named entities.

    Empty categories are unrestricted. Every named entity must exist in
    the project the pipeline starts from; a stale name is an error, not
    a silent no-op.
    """

    events: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()
    invariants: tuple[str, ...] = ()

    def resolve(self, project: Project) -> None:
        m = project.root_machine()
        for e in self.events:
            if m.event(e) is None:
                raise ForgeError(f"focus names unknown event {e!r}")
        for v in self.variables:
            if m.variable(v) is None:
                raise ForgeError(f"focus names unknown variable {v!r}")
        labels = {i.label for i in m.invariants}
        for i in self.invariants:
            if i not in labels:
                raise ForgeError(f"focus names unknown invariant {i!r}")


ProvenanceStep = tuple[str, tuple[str, ...]]


@dataclass(frozen=True)
class Alternative:
    project: Project
    provenance: tuple[ProvenanceStep, ...] = ()
    thread: str | None = None

    def sort_key(self):
        return self.provenance


@dataclass(frozen=True)
class Discard:
    op: str
    bindings: tuple[str, ...]
    reason: str
    provenance: tuple[ProvenanceStep, ...] = ()


# ------------------------------------------------------------- pipeline tree

@dataclass(frozen=True)
class Atomic:
    op: str
    reversal: ReversalConfig | None = None

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ForgeError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class AndApply:
    first: "Pipeline"
    then: "Pipeline"


@dataclass(frozen=True)
class IfRule:
    condition: str
    then: "Pipeline"


@dataclass(frozen=True)
class IfElseRule:
    condition: str
    then: "Pipeline"
    otherwise: "Pipeline"


@dataclass(frozen=True)
class RepeatUntilRule:
    body: "Pipeline"
    until: str


@dataclass(frozen=True)
class WhileRule:
    condition: str
    body: "Pipeline"


@dataclass(frozen=True)
class AccumulatorRule:
    """Run a chain but keep every stage's survivors, not just the last's."""

    body: "Pipeline"


Pipeline = Union[Atomic, AndApply, IfRule, IfElseRule,
                 RepeatUntilRule, WhileRule, AccumulatorRule]


@dataclass(frozen=True)
class PipelineResult:
    alternatives: tuple[Alternative, ...]
    discards: tuple[Discard, ...]


# ---------------------------------------------------------------- evaluation

def _run_atomic(node: Atomic, alt: Alternative, focus: Focus,
                discards: list[Discard]) -> list[Alternative]:
    ctx = OpContext(
        project=alt.project,
        focus_events=frozenset(focus.events),
        focus_variables=frozenset(focus.variables),
        focus_invariants=frozenset(focus.invariants),
        thread=alt.thread,
        reversal=node.reversal or DEFAULT_REVERSAL)
    out: list[Alternative] = []
    for attempt in OPERATORS[node.op](ctx):
        provenance = alt.provenance + ((node.op, attempt.bindings),)
        if attempt.project is None:
            discards.append(Discard(node.op, attempt.bindings, attempt.reason, provenance))
            continue
        problems = project_problems(attempt.project)
        if problems:
            discards.append(Discard(node.op, attempt.bindings,
                                    f"ill-formed: {problems[0]}", provenance))
            continue
        out.append(Alternative(attempt.project, provenance,
                               thread=attempt.created or alt.thread))
    return out


def _chain(p: Pipeline) -> list[Pipeline]:
    """The andApply spine, left to right."""
    if isinstance(p, AndApply):
        return _chain(p.first) + [p.then]
    return [p]


def _eval(p: Pipeline, alt: Alternative, focus: Focus,
          discards: list[Discard]) -> list[Alternative]:
    if isinstance(p, Atomic):
        return _run_atomic(p, alt, focus, discards)
    if isinstance(p, AndApply):
        mid = _eval(p.first, alt, focus, discards)
        out: list[Alternative] = []
        for a in mid:
            out.extend(_eval(p.then, a, focus, discards))
        return out
    if isinstance(p, IfRule):
        if eval_condition(p.condition, alt.project):
            return _eval(p.then, alt, focus, discards)
        return [alt]
    if isinstance(p, IfElseRule):
        branch = p.then if eval_condition(p.condition, alt.project) else p.otherwise
        return _eval(branch, alt, focus, discards)
    if isinstance(p, WhileRule):
        done: list[Alternative] = []
        frontier = [alt]
        rounds = 0
        while frontier and rounds < ITERATION_CAP:
            nxt: list[Alternative] = []
            for a in frontier:
                if eval_condition(p.condition, a.project):
                    nxt.extend(_eval(p.body, a, focus, discards))
                else:
                    done.append(a)
            frontier = nxt
            rounds += 1
        for a in frontier:
            if eval_condition(p.condition, a.project):
                discards.append(Discard("whileRule", (), "iteration cap exceeded", a.provenance))
            else:
                done.append(a)
        return done
    if isinstance(p, RepeatUntilRule):
        done: list[Alternative] = []
        frontier = [alt]
        for _ in range(ITERATION_CAP):
            produced: list[Alternative] = []
            for a in frontier:
                produced.extend(_eval(p.body, a, focus, discards))
            frontier = []
            for a in produced:
                if eval_condition(p.until, a.project):
                    done.append(a)
                else:
                    frontier.append(a)
            if not frontier:
                break
        for a in frontier:
            discards.append(Discard("repeatUntilRule", (), "iteration cap exceeded", a.provenance))
        return done
    if isinstance(p, AccumulatorRule):
        collected: list[Alternative] = []
        level = [alt]
        for stage in _chain(p.body):
            nxt: list[Alternative] = []
            for a in level:
                nxt.extend(_eval(stage, a, focus, discards))
            collected.extend(nxt)
            level = nxt
        return collected
    raise ForgeError(f"unknown pipeline node {p!r}")


def apply_atomic(project: Project, op: str, focus: Focus = Focus()) -> PipelineResult:
    return run_pipeline(Atomic(op), project, focus)


def run_pipeline(pipeline: Pipeline, project: Project,
                 focus: Focus = Focus()) -> PipelineResult:
    focus.resolve(project)
    discards: list[Discard] = []
    alts = _eval(pipeline, Alternative(project), focus, discards)
    alts.sort(key=Alternative.sort_key)
    return PipelineResult(tuple(alts), tuple(discards))
