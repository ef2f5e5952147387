"""Flaw records produced by simulation and analysis."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Flaw:
    """One observed defect.

    kind: "invariant-violation" | "evaluation-fault" | "deadlock"
    subject: invariant label, event name, or "" for whole-model flaws
    """
    kind: str
    subject: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "detail": self.detail}


@dataclass
class NearProperty:
    """A user invariant that breaks and then heals along a trace.

    Each violation run is a maximal span of consecutive states where the
    invariant is false. The violators are the events that produced the
    first state of a run, the restorers those that produced the first
    state after a run. Restored means every run ended before the trace did.
    """
    invariant: str
    violators: tuple[str, ...]
    restorers: tuple[str, ...]
    runs: int
    restored: bool

    def as_dict(self) -> dict:
        return {
            "invariant": self.invariant,
            "violators": list(self.violators),
            "restorers": list(self.restorers),
            "runs": self.runs,
            "restored": self.restored,
        }
