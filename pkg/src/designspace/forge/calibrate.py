"""Calibrations for the error-case pipeline.

The error-case move builds a guarded error event out of two existing
events (combineEvents), then edits that event in place: its actions are
reversed and one guard is negated. The combinator is an accumulator, so
every stage's survivors are alternatives, and the two editing stages
bind to the event the combine stage created rather than fanning out
over the whole machine.

Two stage orders are on the table; see docs/calibration.md for the
counting and why C2 ships as default:

  C1  combine, then negate one guard, then reverse the actions
  C2  combine, then reverse the actions, then negate one guard

Both reverse with the set-operations-only table: an error event undoes
bookkeeping (set membership), it does not un-move money. Under C2 the
bank model yields 11 unconstrained and 7 focused alternatives; C1
yields 17 and 12.
"""
from __future__ import annotations

from dataclasses import dataclass

from .pipeline import AccumulatorRule, AndApply, Atomic, ForgeError, Pipeline
from .reversal import SET_OPS_ONLY


@dataclass(frozen=True)
class Calibration:
    name: str
    stages: tuple[str, ...]  # after combineEvents, in order


CALIBRATIONS: dict[str, Calibration] = {
    "C1": Calibration("C1", ("negateGuard", "undoActions")),
    "C2": Calibration("C2", ("undoActions", "negateGuard")),
}

DEFAULT_CALIBRATION = "C2"


def error_case_pipeline(calibration: str = DEFAULT_CALIBRATION) -> Pipeline:
    try:
        cal = CALIBRATIONS[calibration]
    except KeyError:
        raise ForgeError(f"unknown calibration {calibration!r}") from None
    chain: Pipeline = Atomic("combineEvents")
    for stage in cal.stages:
        reversal = SET_OPS_ONLY if stage == "undoActions" else None
        chain = AndApply(chain, Atomic(stage, reversal=reversal))
    return AccumulatorRule(chain)
