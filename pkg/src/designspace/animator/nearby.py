"""Spot invariants that break and heal along a trace.

A trace where an invariant fails transiently but is always re-established
suggests the property is not wrong, just stated at the wrong granularity:
the machine maintains it between transactions, not within them.
"""
from __future__ import annotations

from .flaws import NearProperty
from .sim import FlatModel, check_invariants
from .trace import Trace


def near_properties(model: FlatModel, trace: Trace) -> list[NearProperty]:
    states = trace.states()
    n = len(states) - 1  # post-states, ids 0..n-1
    if n == 0:
        return []
    bad: dict[str, list[int]] = {}
    for sid in range(n):
        violated, _ = check_invariants(model, states[sid + 1])
        for lab in violated:
            bad.setdefault(lab, []).append(sid)
    out: list[NearProperty] = []
    for lab in sorted(bad):
        ids = bad[lab]
        runs: list[tuple[int, int]] = []
        start = prev = ids[0]
        for sid in ids[1:]:
            if sid == prev + 1:
                prev = sid
            else:
                runs.append((start, prev))
                start = prev = sid
        runs.append((start, prev))
        violators = sorted({trace.producer(a) for a, _ in runs})
        restorers = sorted({trace.producer(b + 1) for _, b in runs if b < n - 1})
        restored = all(b < n - 1 for _, b in runs)
        out.append(NearProperty(lab, tuple(violators), tuple(restorers),
                                len(runs), restored))
    return out
