"""Ordering freshly generated alternatives.

Each child gets a shallow re-simulation (a few short seeded walks) and
is sorted by: still deadlocks, number of flaw classes, number of
violated invariants, diff size against the parent, then the pipeline's
own provenance order. A child that cannot even be simulated goes last.

This key is artifact plumbing: nothing upstream prescribes an order,
only that one is presented."""
from __future__ import annotations

from dataclasses import dataclass

from ..animator.explore import random_walk
from ..animator.sim import flatten
from ..forge import Alternative
from ..kernel.diffing import diff
from ..kernel.model import Project
from .analysis import AnalysisConfig


@dataclass(frozen=True)
class QuickLook:
    failed: bool
    deadlocked: bool
    flaw_kinds: tuple[str, ...]
    violated: tuple[str, ...]

    def as_dict(self) -> dict:
        return {"failed": self.failed, "deadlocked": self.deadlocked,
                "flawKinds": list(self.flaw_kinds),
                "violated": list(self.violated)}


def quick_look(project: Project,
               config: AnalysisConfig = AnalysisConfig()) -> QuickLook:
    try:
        model = flatten(project)
        kinds: set[str] = set()
        violated: set[str] = set()
        deadlocked = False
        for seed in range(config.quick_seeds):
            res = random_walk(model, seed=seed, max_steps=config.quick_steps,
                              int_range=config.int_range)
            kinds |= res.flaw_kinds()
            violated |= res.violated_labels
            deadlocked = deadlocked or bool(res.deadlocks)
    except Exception:
        return QuickLook(True, False, (), ())
    return QuickLook(False, deadlocked,
                     tuple(sorted(kinds)), tuple(sorted(violated)))


@dataclass(frozen=True)
class RankedChild:
    alternative: Alternative
    look: QuickLook
    diff_size: int
    key: tuple

    def score_dict(self) -> dict:
        return {"key": list(self.key), "quick": self.look.as_dict(),
                "diffSize": self.diff_size}


def rank_children(parent: Project, alternatives,
                  config: AnalysisConfig = AnalysisConfig()) -> list[RankedChild]:
    out = []
    for i, alt in enumerate(alternatives):
        look = quick_look(alt.project, config)
        size = len(diff(parent, alt.project))
        key = (look.failed, look.deadlocked, len(look.flaw_kinds),
               len(look.violated), size, i)
        out.append(RankedChild(alt, look, size, key))
    out.sort(key=lambda r: r.key)
    return out
