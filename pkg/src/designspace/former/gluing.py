"""Hunt for gluing invariants across a refinement pair.

Both machines run the same schedule: steps whose event name is missing
or disabled on the abstract side stutter (the abstract state is simply
carried forward), so the two traces stay aligned state for state.
Abstract tables are prefixed "abs." to keep the two variable namespaces
apart, then one theory is formed over the union and the exact
equivalences that bridge the namespaces are the candidates.
"""
from __future__ import annotations

import dataclasses

from ..animator.export import export_tables
from ..animator.sim import FlatModel, init_state, step
from ..animator.trace import EventInstance, Step, Trace
from .tables import DataTable
from .theory import FormerConfig, Theory, form_theory

STUTTER = "(stutter)"


class GluingError(ValueError):
    """Bundles cannot be aligned state for state."""


def _enabled_here(model: FlatModel, state, inst: EventInstance) -> bool:
    from ..animator.evaluator import EvalFault, eval_expr
    ev = model.event(inst.event)
    if ev is None:
        return False
    declared = {p.name for p in ev.params}
    if {n for n, _ in inst.binding} != declared:
        return False
    env = dict(model.constants)
    env.update(state)
    env.update(inst.binding)
    for g in ev.guards:
        try:
            if not eval_expr(g.pred, env):
                return False
        except EvalFault:
            return False
    return True


def pair_traces(abstract: FlatModel, concrete: FlatModel,
                schedule) -> tuple[Trace, Trace]:
    """Replay the schedule on both machines, stuttering the abstract
    side whenever the named event is absent or disabled there."""
    conc_state = init_state(concrete)
    abs_state = init_state(abstract)
    conc_trace = Trace(conc_state)
    abs_trace = Trace(abs_state)
    for i, inst in enumerate(schedule):
        if not _enabled_here(concrete, conc_state, inst):
            raise GluingError(f"step {i}: {inst.event} not enabled on the "
                              "concrete machine")
        conc_state, _ = step(concrete, conc_state, inst)
        conc_trace.steps.append(Step(inst, conc_state))
        if _enabled_here(abstract, abs_state, inst):
            abs_state, _ = step(abstract, abs_state, inst)
            abs_trace.steps.append(Step(inst, abs_state))
        else:
            abs_trace.steps.append(Step(EventInstance(STUTTER, ()), abs_state))
    return abs_trace, conc_trace


def _prefixed(t: DataTable, prefix: str) -> DataTable:
    return dataclasses.replace(
        t, defn=prefix + t.defn,
        symbols=frozenset(prefix + s for s in t.symbols))


def variable_tables(model: FlatModel, bundle: dict) -> list[DataTable]:
    names = [v.name for v in model.variables]
    return [bundle[n] for n in names if n in bundle]


def find_gluing(abs_tables: list[DataTable], conc_tables: list[DataTable],
                config: FormerConfig | None = None) -> list:
    """Exact equivalences whose sides live in different namespaces."""
    if not abs_tables:
        return []
    abs_states = {frozenset(t.domain(t.columns[0])) for t in abs_tables}
    conc_states = {frozenset(t.domain(t.columns[0])) for t in conc_tables}
    if abs_states and conc_states and abs_states != conc_states:
        raise GluingError("state spaces differ between the two bundles")
    prefixed = [_prefixed(t, "abs.") for t in abs_tables]
    abs_syms = frozenset().union(*(t.symbols for t in prefixed))
    conc_syms = frozenset().union(*(t.symbols for t in conc_tables)) \
        if conc_tables else frozenset()
    theory = form_theory(list(prefixed) + list(conc_tables), config)
    out = []
    for c in theory.conjectures:
        if c.kind != "iff":
            continue
        ls, rs = c.lhs.symbols, c.rhs.symbols
        crosses = ((ls and ls <= abs_syms and rs and rs <= conc_syms)
                   or (ls and ls <= conc_syms and rs and rs <= abs_syms))
        if crosses:
            out.append(c.tagged({"gluing"}))
    out.sort(key=lambda c: (-c.satisfying, c.definition_size(), c.index))
    return out


def gluing_for_pair(abstract: FlatModel, concrete: FlatModel, schedule,
                    config: FormerConfig | None = None) -> list:
    abs_trace, conc_trace = pair_traces(abstract, concrete, schedule)
    abs_bundle = export_tables(abstract, abs_trace)
    conc_bundle = export_tables(concrete, conc_trace)
    return find_gluing(variable_tables(abstract, abs_bundle),
                       variable_tables(concrete, conc_bundle), config)
