"""The pattern library: canned pipelines suggested by an analysis.

abstractAway(k) deletes k pieces of bookkeeping state and atomises a
pair of events into one; errorCase forks an event into an explicit
failure variant. Both take their focus from the report that suggested
them."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from ..forge import AndApply, Atomic, Focus, Pipeline, error_case_pipeline
from ..kernel.model import Event, Machine, Project, Variable
from ..kernel.terms import refs_name

PATTERN_KINDS = ("abstractAway", "errorCase")


class PatternError(ValueError):
    """The pattern cannot be instantiated against this report."""


@dataclass(frozen=True)
class Pattern:
    kind: str
    k: int = 1

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise PatternError(f"unknown pattern {self.kind!r}")
        if self.kind == "abstractAway" and self.k not in (1, 2):
            raise PatternError("abstractAway takes 1 or 2 variables")
        if self.kind == "errorCase" and self.k != 1:
            raise PatternError("errorCase has no variable count")

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "abstractAway":
            out["k"] = self.k
        return out

    @staticmethod
    def from_dict(d: dict) -> "Pattern":
        return Pattern(d["kind"], int(d.get("k", 1)))


def _uses_in_actions(ev: Event, name: str) -> bool:
    return any(a.target == name or name in a.reads() for a in ev.actions)


def _uses_in_guards(ev: Event, name: str) -> bool:
    return any(refs_name(g.pred, name) for g in ev.guards)


def _candidate_order(machine: Machine, focus_events, name: str) -> int:
    """A variable both tested and updated by an implicated event is the
    channel the failure flows through; plain updates rank next."""
    events = [e for e in machine.events if e.name in focus_events]
    guarded = any(_uses_in_guards(e, name) for e in events)
    acted = any(_uses_in_actions(e, name) for e in events)
    if guarded and acted:
        return 0
    if acted:
        return 1
    if guarded:
        return 2
    return 3


def _event_focus(machine: Machine, focus_events,
                 merging: bool = False) -> tuple[str, ...]:
    # naming every event constrains nothing, so drop the category; with
    # exactly two events a merge pair is forced anyway
    if merging and len(machine.events) == 2:
        return ()
    if 0 < len(focus_events) < len(machine.events):
        return tuple(focus_events)
    return ()


def pattern_pipeline(pattern: Pattern,
                     calibration: str | None = None) -> Pipeline:
    if pattern.kind == "errorCase":
        return (error_case_pipeline(calibration) if calibration
                else error_case_pipeline())
    atoms = [Atomic("deleteVariable") for _ in range(pattern.k)]
    return reduce(AndApply, atoms[1:] + [Atomic("mergeEvents")], atoms[0])


def pattern_focus(pattern: Pattern, report, project: Project) -> Focus:
    """Derive the focus a pattern takes from an analysis report.

    `report` only needs focus_events and focus_variables, so both a
    fresh AnalysisReport and a reloaded one work."""
    machine = project.root_machine()
    if len(machine.events) < 2:
        raise PatternError(f"{pattern.kind} needs at least two events")
    focus_events = tuple(report.focus_events)

    if pattern.kind == "errorCase":
        return Focus(events=_event_focus(machine, focus_events))

    kept = _event_focus(machine, focus_events, merging=True)
    ranked: list[tuple[int, int, Variable]] = sorted(
        ((_candidate_order(machine, kept, v.name), i, v)
         for i, v in enumerate(machine.variables)
         if not v.functional and v.name in report.focus_variables),
        key=lambda t: t[:2])
    if pattern.k > len(ranked):
        raise PatternError(
            f"abstractAway({pattern.k}) needs {pattern.k} bookkeeping "
            f"variables in focus, found {len(ranked)}")
    chosen = tuple(t[2].name for t in ranked[:pattern.k])
    return Focus(events=kept, variables=chosen)


def instantiate_pattern(pattern: Pattern, report, project: Project,
                        calibration: str | None = None
                        ) -> tuple[Pipeline, Focus]:
    focus = pattern_focus(pattern, report, project)
    return pattern_pipeline(pattern, calibration), focus
