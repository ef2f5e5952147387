"""State-space exploration: seeded random walks and bounded breadth-first
search. Both are deterministic for a given seed and budget."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .flaws import Flaw
from .sim import (EventInstance, FlatModel, IntRange, check_invariants,
                  enabled, init_state, state_key, step)
from .trace import Step, Trace


@dataclass
class ExploreResult:
    traces: list[Trace]
    n_states: int
    n_transitions: int
    deadlocks: list[dict]            # distinct dead states
    deadlock_traces: list[Trace]     # one witness path per dead state
    flaws: set
    violated_labels: set[str]
    partial: bool                    # budget ran out before exhaustion

    def flaw_kinds(self) -> set[str]:
        return {f.kind for f in self.flaws}


def random_walk(model: FlatModel, seed: int = 0, max_steps: int = 100,
                int_range: IntRange = IntRange()) -> ExploreResult:
    """One seeded walk from the initial state, stopping at the step
    budget or at a deadlock."""
    rng = random.Random(seed)
    state = init_state(model)
    key = state_key(state)
    trace = Trace(state)
    flaws: set[Flaw] = set()
    violated: set[str] = set()
    seen = {key}
    deadlocks: list[dict] = []
    deadlock_traces: list[Trace] = []

    labels, inv_flaws = check_invariants(model, state)
    flaws |= inv_flaws
    violated |= set(labels)

    # walks revisit states constantly; enumerating enabled instances is the
    # dominant cost, so memoise it per state within the walk
    memo: dict = {}
    transitions = 0
    for _ in range(max_steps):
        hit = memo.get(key)
        if hit is None:
            hit = enabled(model, state, int_range)
            memo[key] = hit
        insts, en_flaws = hit
        flaws |= en_flaws
        if not insts:
            deadlocks.append(dict(state))
            deadlock_traces.append(Trace(trace.init, list(trace.steps)))
            flaws.add(Flaw("deadlock", "", f"after {len(trace)} steps"))
            break
        inst = insts[rng.randrange(len(insts))]
        state, st_flaws = step(model, state, inst)
        flaws |= st_flaws
        transitions += 1
        trace.steps.append(Step(inst, state))
        key = state_key(state)
        seen.add(key)
        labels, inv_flaws = check_invariants(model, state)
        flaws |= inv_flaws
        violated |= set(labels)
        for lab in labels:
            flaws.add(Flaw("invariant-violation", lab, f"step {len(trace)}"))
    return ExploreResult([trace], len(seen), transitions, deadlocks,
                         deadlock_traces, flaws, violated, partial=False)


def bfs(model: FlatModel, max_states: int = 2000,
        int_range: IntRange = IntRange()) -> ExploreResult:
    """Breadth-first reachability up to a state budget.

    Returns witness traces to each distinct deadlocked state found.
    `partial` is set when the frontier was still alive at the cap."""
    init = init_state(model)
    init_key = state_key(init)
    parent: dict = {init_key: None}
    states: dict = {init_key: init}
    queue = deque([init_key])
    flaws: set[Flaw] = set()
    violated: set[str] = set()
    deadlocks: list[dict] = []
    dead_keys: list = []
    transitions = 0
    partial = False

    while queue:
        if len(states) > max_states:
            partial = True
            break
        key = queue.popleft()
        state = states[key]
        labels, inv_flaws = check_invariants(model, state)
        flaws |= inv_flaws
        violated |= set(labels)
        for lab in labels:
            flaws.add(Flaw("invariant-violation", lab, "reachable state"))
        insts, en_flaws = enabled(model, state, int_range)
        flaws |= en_flaws
        if not insts:
            deadlocks.append(dict(state))
            dead_keys.append(key)
            flaws.add(Flaw("deadlock", "", "reachable dead state"))
            continue
        for inst in insts:
            post, st_flaws = step(model, state, inst)
            flaws |= st_flaws
            transitions += 1
            post_key = state_key(post)
            if post_key not in states:
                states[post_key] = post
                parent[post_key] = (key, inst)
                queue.append(post_key)
    if queue:
        partial = True

    deadlock_traces = []
    for dk in dead_keys:
        path: list[tuple] = []
        cur = dk
        while parent[cur] is not None:
            prev, inst = parent[cur]
            path.append((inst, states[cur]))
            cur = prev
        path.reverse()
        deadlock_traces.append(
            Trace(states[cur], [Step(i, s) for i, s in path]))
    return ExploreResult([], len(states), transitions, deadlocks,
                         deadlock_traces, flaws, violated, partial)


def _nearest(model: FlatModel, origin: dict, matches, int_range: IntRange,
             max_states: int) -> list[EventInstance] | None:
    """Shortest schedule from `origin` to a state satisfying `matches`.

    Returns [] when the origin itself matches, None when the budget
    empties first."""
    if matches(origin):
        return []
    okey = state_key(origin)
    parent: dict = {okey: None}
    states = {okey: origin}
    queue = deque([okey])

    def unwind(key) -> list[EventInstance]:
        path: list[EventInstance] = []
        cur = key
        while parent[cur] is not None:
            prev, inst = parent[cur]
            path.append(inst)
            cur = prev
        path.reverse()
        return path

    # matches is tested on push, not pop: under wide branching the
    # budget would empty before a flagged state ever left the queue
    while queue and len(states) <= max_states:
        key = queue.popleft()
        state = states[key]
        insts, _ = enabled(model, state, int_range)
        for inst in insts:
            post, _ = step(model, state, inst)
            pkey = state_key(post)
            if pkey in states:
                continue
            states[pkey] = post
            parent[pkey] = (key, inst)
            if matches(post):
                return unwind(pkey)
            queue.append(pkey)
    return None


def flaw_probe(model: FlatModel, int_range: IntRange = IntRange(),
               max_states: int = 2000, windows: int = 2) -> list[EventInstance]:
    """Schedule that walks to the nearest invariant violation and back
    to a clean state, repeated up to `windows` times.

    The point is a small, sharply contrasted dataset: states outside
    the violation window stay clean, so the events inside it are the
    ones a theory over the trace will tie to the failure. Empty when
    no violation is reachable within the budget."""
    def bad(state: dict) -> bool:
        labels, _ = check_invariants(model, state)
        return bool(labels)

    schedule: list[EventInstance] = []
    state = init_state(model)
    for _ in range(windows):
        there = _nearest(model, state, bad, int_range, max_states)
        if not there:
            break
        for inst in there:
            state, _ = step(model, state, inst)
        schedule.extend(there)
        back = _nearest(model, state, lambda s: not bad(s), int_range, max_states)
        if not back:
            break
        for inst in back:
            state, _ = step(model, state, inst)
        schedule.extend(back)
    return schedule
