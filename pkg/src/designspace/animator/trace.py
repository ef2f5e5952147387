"""Traces and schedule replay."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..kernel.terms import Atom, Value
from .evaluator import EvalFault, eval_expr
from .flaws import Flaw
from .sim import EventInstance, FlatModel, check_invariants, init_state, step


@dataclass
class Step:
    instance: EventInstance
    post: dict


@dataclass
class Trace:
    init: dict
    steps: list[Step] = field(default_factory=list)

    def states(self) -> list[dict]:
        return [self.init] + [s.post for s in self.steps]

    def producer(self, state_id: int) -> str:
        """Event that produced post-state `state_id` (0-based)."""
        return self.steps[state_id].instance.event

    def __len__(self) -> int:
        return len(self.steps)


class ReplayError(Exception):
    def __init__(self, index: int, message: str):
        super().__init__(f"step {index}: {message}")
        self.index = index


def make_instance(model: FlatModel, event: str, args: dict) -> EventInstance:
    """Build an instance from plain JSON-ish argument values."""
    ev = model.event(event)
    if ev is None:
        raise KeyError(f"no event named {event!r}")
    binding = []
    for p in ev.params:
        if p.name not in args:
            raise KeyError(f"{event}: missing argument {p.name!r}")
        raw = args[p.name]
        if p.type.kind == "carrier" and isinstance(raw, str):
            raw = Atom(raw)
        binding.append((p.name, raw))
    extra = set(args) - {p.name for p in ev.params}
    if extra:
        raise KeyError(f"{event}: unknown arguments {sorted(extra)}")
    return EventInstance(event, tuple(binding))


@dataclass
class ReplayResult:
    trace: Trace
    violations: list[tuple[int, list[str]]]   # (state id, violated labels)
    flaws: set

    def violated_states(self) -> set[int]:
        return {s for s, labels in self.violations if labels}


def replay(model: FlatModel, schedule: list[EventInstance]) -> ReplayResult:
    """Fire a fixed schedule, failing fast on a disabled step."""
    state = init_state(model)
    trace = Trace(state)
    flaws: set[Flaw] = set()
    violations: list[tuple[int, list[str]]] = []
    for i, inst in enumerate(schedule):
        ev = model.event(inst.event)
        if ev is None:
            raise ReplayError(i, f"no event named {inst.event!r}")
        env = dict(model.constants)
        env.update(state)
        env.update(inst.binding)
        for g in ev.guards:
            try:
                ok = eval_expr(g.pred, env)
            except EvalFault as f:
                raise ReplayError(i, f"{inst.pretty()} guard {g.label} faults: {f}")
            if not ok:
                raise ReplayError(i, f"{inst.pretty()} not enabled ({g.label} false)")
        state, step_flaws = step(model, state, inst)
        flaws |= step_flaws
        trace.steps.append(Step(inst, state))
        labels, inv_flaws = check_invariants(model, state)
        flaws |= inv_flaws
        violations.append((i, labels))
        for lab in labels:
            flaws.add(Flaw("invariant-violation", lab, f"state {i}"))
    return ReplayResult(trace, violations, flaws)
