"""The atomic transformation operators.

Every operator takes one project and fans out into candidate rewrites,
one per way of binding the operator to entities of the subject machine
(the project root). Candidates that the operator itself cannot build
(irreversible action, parameter clash, dangling reference) come back as
refusals with a reason; structurally ill-formed results are filtered by
the pipeline layer afterwards.

Binding enumeration is deterministic: declaration order for single
entities, declaration-ordered pairs for pair operators. mergeEvents
runs over unordered distinct pairs, combineEvents over ordered ones;
repeated deleteVariable stages therefore enumerate ordered distinct
variable sequences.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from ..kernel.model import (Action, Event, Guard, Invariant, Machine, Param,
                            Project, Variable, Witness, machine_refs)
from ..kernel.terms import Expr, negate, refs_name, rename_ident, substitute, variable_refs
from .reversal import DEFAULT_REVERSAL, ReversalConfig, reverse_action


@dataclass(frozen=True)
class Attempt:
    """One candidate binding: either a rewritten project or a refusal."""

    bindings: tuple[str, ...]
    project: Project | None
    reason: str = ""
    created: str | None = None  # event name the rewrite introduced, if any


@dataclass(frozen=True)
class OpContext:
    project: Project
    focus_events: frozenset[str] = frozenset()
    focus_variables: frozenset[str] = frozenset()
    focus_invariants: frozenset[str] = frozenset()
    thread: str | None = None   # event produced by the previous stage
    reversal: ReversalConfig = DEFAULT_REVERSAL

    @property
    def subject(self) -> Machine:
        return self.project.root_machine()

    def events(self) -> list[Event]:
        """Events a single-event binding may use.

        A thread narrows the universe to the event the previous stage
        created; it is exempt from the event focus, which was already
        honoured when that event was made.
        """
        m = self.subject
        if self.thread is not None:
            e = m.event(self.thread)
            return [e] if e is not None else []
        if self.focus_events:
            return [e for e in m.events if e.name in self.focus_events]
        return list(m.events)

    def pair_allowed(self, e1: str, e2: str) -> bool:
        if self.thread is not None:
            return self.thread in (e1, e2)
        if self.focus_events:
            return bool({e1, e2} & self.focus_events)
        return True

    def variables(self) -> list[Variable]:
        m = self.subject
        if self.focus_variables:
            return [v for v in m.variables if v.name in self.focus_variables]
        return list(m.variables)

    def invariants(self) -> list[Invariant]:
        m = self.subject
        if self.focus_invariants:
            return [i for i in m.invariants if i.label in self.focus_invariants]
        return list(m.invariants)


Operator = Callable[[OpContext], list[Attempt]]
OPERATORS: dict[str, Operator] = {}


def _operator(name: str):
    def reg(fn: Operator) -> Operator:
        OPERATORS[name] = fn
        return fn
    return reg


def _relabel(ev: Event) -> Event:
    guards = tuple(replace(g, label=f"grd{i}") for i, g in enumerate(ev.guards, start=1))
    actions = tuple(replace(a, label=f"act{i}") for i, a in enumerate(ev.actions, start=1))
    witnesses = tuple(replace(w, label=f"wit{i}") for i, w in enumerate(ev.witnesses, start=1))
    return replace(ev, guards=guards, actions=actions, witnesses=witnesses)


def _swap_event(ctx: OpContext, updated: Event, old_name: str | None = None) -> Project:
    m = ctx.subject
    old = old_name or updated.name
    events = tuple(updated if e.name == old else e for e in m.events)
    return ctx.project.with_machine(replace(m, events=events))


def _fresh_name(taken: set[str], base: str) -> str:
    if base not in taken:
        return base
    n = 2
    while f"{base}{n}" in taken:
        n += 1
    return f"{base}{n}"


# ---------------------------------------------------------------- deletions

@_operator("deleteArgument")
def delete_argument(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    for ev in ctx.events():
        for p in ev.params:
            binding = (ev.name, p.name)
            used_by_action = any(
                refs_name(a.rhs, p.name)
                or (a.index is not None and refs_name(a.index, p.name))
                for a in ev.actions)
            if used_by_action:
                out.append(Attempt(binding, None,
                                   f"an action of {ev.name} still uses {p.name}"))
                continue
            new = replace(
                ev,
                params=tuple(q for q in ev.params if q.name != p.name),
                guards=tuple(g for g in ev.guards if not refs_name(g.pred, p.name)),
                witnesses=tuple(w for w in ev.witnesses if not refs_name(w.pred, p.name)))
            out.append(Attempt(binding, _swap_event(ctx, new)))
    return out


@_operator("deleteWitness")
def delete_witness(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    for ev in ctx.events():
        for w in ev.witnesses:
            new = replace(ev, witnesses=tuple(x for x in ev.witnesses if x.label != w.label))
            out.append(Attempt((ev.name, w.label), _swap_event(ctx, new)))
    return out


@_operator("deleteGuard")
def delete_guard(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    for ev in ctx.events():
        for g in ev.guards:
            new = replace(ev, guards=tuple(x for x in ev.guards if x.label != g.label))
            out.append(Attempt((ev.name, g.label), _swap_event(ctx, new)))
    return out


@_operator("deleteAction")
def delete_action(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    for ev in ctx.events():
        for a in ev.actions:
            new = replace(ev, actions=tuple(x for x in ev.actions if x.label != a.label))
            out.append(Attempt((ev.name, a.label), _swap_event(ctx, new)))
    return out


@_operator("deleteInvariant")
def delete_invariant(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    m = ctx.subject
    for inv in ctx.invariants():
        invs = tuple(i for i in m.invariants if i.label != inv.label)
        out.append(Attempt((inv.label,), ctx.project.with_machine(replace(m, invariants=invs))))
    return out


def _strip_variable(ev: Event, name: str) -> Event:
    return replace(
        ev,
        guards=tuple(g for g in ev.guards if not refs_name(g.pred, name)),
        actions=tuple(a for a in ev.actions if a.target != name))


@_operator("deleteVariable")
def delete_variable(ctx: OpContext) -> list[Attempt]:
    """Drop a variable together with everything that defines it.

    Assigning actions, referring guard conjuncts, and referring
    invariant conjuncts go with it. Anything else that still mentions
    the variable afterwards (an action reading it, a witness) makes the
    rewrite a refusal rather than a broken machine.
    """
    out: list[Attempt] = []
    m = ctx.subject
    for v in ctx.variables():
        new = replace(
            m,
            variables=tuple(x for x in m.variables if x.name != v.name),
            invariants=tuple(i for i in m.invariants if not refs_name(i.pred, v.name)),
            init=replace(m.init, actions=tuple(a for a in m.init.actions if a.target != v.name)),
            events=tuple(_strip_variable(e, v.name) for e in m.events))
        if machine_refs(new, v.name):
            out.append(Attempt((v.name,), None, f"{v.name} is still referenced"))
            continue
        out.append(Attempt((v.name,), ctx.project.with_machine(new)))
    return out


# ---------------------------------------------------------------- negation

@_operator("negateGuard")
def negate_guard(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    for ev in ctx.events():
        for g in ev.guards:
            guards = tuple(replace(x, pred=negate(x.pred)) if x.label == g.label else x
                           for x in ev.guards)
            out.append(Attempt((ev.name, g.label), _swap_event(ctx, replace(ev, guards=guards))))
    return out


@_operator("negateAction")
def negate_action(ctx: OpContext) -> list[Attempt]:
    out: list[Attempt] = []
    for ev in ctx.events():
        for a in ev.actions:
            rev = reverse_action(a, ctx.reversal)
            if rev is None:
                out.append(Attempt((ev.name, a.label), None,
                                   f"action {a.label} of {ev.name} is irreversible"))
                continue
            actions = tuple(rev if x.label == a.label else x for x in ev.actions)
            out.append(Attempt((ev.name, a.label), _swap_event(ctx, replace(ev, actions=actions))))
    return out


@_operator("undoActions")
def undo_actions(ctx: OpContext) -> list[Attempt]:
    # all-or-nothing: one irreversible action vetoes the whole event
    out: list[Attempt] = []
    for ev in ctx.events():
        reversed_actions = []
        stuck = None
        for a in ev.actions:
            rev = reverse_action(a, ctx.reversal)
            if rev is None:
                stuck = a
                break
            reversed_actions.append(rev)
        if stuck is not None:
            out.append(Attempt((ev.name,), None,
                               f"action {stuck.label} of {ev.name} is irreversible"))
            continue
        out.append(Attempt((ev.name,),
                           _swap_event(ctx, replace(ev, actions=tuple(reversed_actions))),
                           created=ev.name))
    return out


# ---------------------------------------------------------------- event pairs

def _unify_params(e1: Event, e2: Event) -> tuple[Param, ...] | None:
    """Parameters keyed by name; a name carrying two types is a clash."""
    out: list[Param] = list(e1.params)
    byname = {p.name: p for p in out}
    for p in e2.params:
        q = byname.get(p.name)
        if q is None:
            out.append(p)
            byname[p.name] = p
        elif q.type != p.type:
            return None
    return tuple(out)


def _dedup_guards(guards: tuple[Guard, ...]) -> tuple[Guard, ...]:
    seen: list[Expr] = []
    out: list[Guard] = []
    for g in guards:
        if g.pred in seen:
            continue
        seen.append(g.pred)
        out.append(g)
    return tuple(out)


def _combine_actions(first: tuple[Action, ...], second: tuple[Action, ...]) -> tuple[Action, ...] | str:
    """Parallel union of two action sets, one event's worth each.

    Writes to distinct variables stay parallel, as do pointwise writes
    at distinct indexes. Two plain writes to the same variable compose
    sequentially when the second reads it (its occurrences are replaced
    by the first write's value); a second write that ignores the old
    value would silently clobber the first, and that is a conflict.
    """
    out: list[Action] = list(first)
    for b in second:
        slot = None
        for i, a in enumerate(out):
            if a.target != b.target:
                continue
            if a.index is not None and b.index is not None and a.index != b.index:
                continue  # distinct pointwise cells run in parallel
            if a.index is None and b.index is None:
                if not refs_name(b.rhs, b.target):
                    return f"both write {b.target} and the second ignores the first"
                slot = i
                break
            return f"both write {b.target} through incompatible forms"
        if slot is None:
            out.append(b)
        else:
            a = out[slot]
            out[slot] = replace(a, rhs=substitute(b.rhs, b.target, a.rhs))
    return tuple(out)


def _pair_event_name(e1: str, e2: str, focus_events: frozenset[str], suffix: str) -> str:
    inside = [e for e in (e1, e2) if e in focus_events]
    if len(inside) == 1:
        return f"{inside[0]}_{suffix}"
    return f"{e1}_{e2}"


def _dedup_witnesses(ws: tuple[Witness, ...]) -> tuple[Witness, ...]:
    seen: list[Expr] = []
    out: list[Witness] = []
    for w in ws:
        if w.pred in seen:
            continue
        seen.append(w.pred)
        out.append(w)
    return tuple(out)


@_operator("mergeEvents")
def merge_events(ctx: OpContext) -> list[Attempt]:
    """Fuse an unordered pair of events into one that does both at once."""
    out: list[Attempt] = []
    m = ctx.subject
    events = m.events
    for i, e1 in enumerate(events):
        for e2 in events[i + 1:]:
            if not ctx.pair_allowed(e1.name, e2.name):
                continue
            binding = (e1.name, e2.name)
            params = _unify_params(e1, e2)
            if params is None:
                out.append(Attempt(binding, None, "parameter name carries two types"))
                continue
            actions = _combine_actions(e1.actions, e2.actions)
            if isinstance(actions, str):
                out.append(Attempt(binding, None, actions))
                continue
            name = _pair_event_name(e1.name, e2.name, ctx.focus_events, "abs")
            merged = _relabel(Event(
                name=name,
                params=params,
                guards=_dedup_guards(e1.guards + e2.guards),
                actions=actions,
                witnesses=_dedup_witnesses(e1.witnesses + e2.witnesses)))
            new_events = tuple(
                merged if e.name == e1.name else e
                for e in events if e.name != e2.name)
            project = ctx.project.with_machine(replace(m, events=new_events))
            out.append(Attempt(binding, project, created=name))
    return out


@_operator("combineEvents")
def combine_events(ctx: OpContext) -> list[Attempt]:
    """Add an event that fires under e1's guards but does what e2 does."""
    out: list[Attempt] = []
    m = ctx.subject
    for e1 in m.events:
        for e2 in m.events:
            if e1.name == e2.name or not ctx.pair_allowed(e1.name, e2.name):
                continue
            binding = (e1.name, e2.name)
            params = _unify_params(e1, e2)
            if params is None:
                out.append(Attempt(binding, None, "parameter name carries two types"))
                continue
            name = _pair_event_name(e1.name, e2.name, ctx.focus_events, "err")
            combined = _relabel(Event(
                name=name,
                params=params,
                guards=_dedup_guards(e1.guards),
                actions=e2.actions,
                witnesses=_dedup_witnesses(e1.witnesses + e2.witnesses)))
            project = ctx.project.with_machine(replace(m, events=m.events + (combined,)))
            out.append(Attempt(binding, project, created=name))
    return out


# ---------------------------------------------------------------- layering

def _abstract_machine(ctx: OpContext) -> Machine | None:
    above = ctx.subject.refines
    if above is None:
        return None
    try:
        return ctx.project.machine(above)
    except KeyError:
        return None


@_operator("insertAbstractLayer")
def insert_abstract_layer(ctx: OpContext) -> list[Attempt]:
    m = ctx.subject
    taken = {x.name for x in ctx.project.machines} | {c.name for c in ctx.project.contexts}
    name = _fresh_name(taken, f"Abs{m.name}")
    layer = Machine(name=name, refines=m.refines)
    project = replace(ctx.project, machines=ctx.project.machines + (layer,))
    project = project.with_machine(replace(m, refines=name))
    return [Attempt((name,), project)]


@_operator("addAbstractLayer")
def add_abstract_layer(ctx: OpContext) -> list[Attempt]:
    """Clone the subject one level up, with its variables renamed apart."""
    m = ctx.subject
    taken = {x.name for x in ctx.project.machines} | {c.name for c in ctx.project.contexts}
    name = _fresh_name(taken, f"Abs{m.name}")
    renames: dict[str, str] = {}
    used = {v.name for v in m.variables}
    for v in m.variables:
        renames[v.name] = _fresh_name(used, f"a{v.name}")
        used.add(renames[v.name])

    def rn(e: Expr) -> Expr:
        for old, new in renames.items():
            e = rename_ident(e, old, new)
        return e

    def rn_event(ev: Event) -> Event:
        return replace(
            ev,
            guards=tuple(replace(g, pred=rn(g.pred)) for g in ev.guards),
            actions=tuple(replace(a, target=renames.get(a.target, a.target),
                                  rhs=rn(a.rhs),
                                  index=rn(a.index) if a.index is not None else None)
                          for a in ev.actions),
            witnesses=tuple(replace(w, pred=rn(w.pred)) for w in ev.witnesses))

    layer = Machine(
        name=name,
        refines=m.refines,
        sees=m.sees,
        variables=tuple(replace(v, name=renames[v.name]) for v in m.variables),
        invariants=tuple(replace(i, pred=rn(i.pred)) for i in m.invariants),
        init=rn_event(m.init),
        events=tuple(rn_event(e) for e in m.events))
    project = replace(ctx.project, machines=ctx.project.machines + (layer,))
    project = project.with_machine(replace(m, refines=name))
    return [Attempt((name,), project)]


@_operator("addSeesContextToAbstractLayer")
def add_sees_context(ctx: OpContext) -> list[Attempt]:
    layer = _abstract_machine(ctx)
    if layer is None:
        return [Attempt((), None, "no abstract layer")]
    out: list[Attempt] = []
    for c in ctx.project.contexts:
        if c.name in layer.sees:
            continue
        updated = replace(layer, sees=layer.sees + (c.name,))
        out.append(Attempt((c.name,), ctx.project.with_machine(updated)))
    return out


@_operator("moveVariableToAbstractLayer")
def move_variable_up(ctx: OpContext) -> list[Attempt]:
    """Promote a variable: declaration and initialisation move up one
    layer, along with any invariant the upper layer can state by itself.
    The subject keeps using the variable through refinement visibility.
    """
    layer = _abstract_machine(ctx)
    if layer is None:
        return [Attempt((), None, "no abstract layer")]
    out: list[Attempt] = []
    m = ctx.subject
    for v in ctx.variables():
        if layer.variable(v.name) is not None:
            out.append(Attempt((v.name,), None, f"{v.name} already declared above"))
            continue
        upper_scope = {x.name for x in layer.variables} | {v.name}
        moving = [i for i in m.invariants
                  if refs_name(i.pred, v.name) and variable_refs(i.pred) <= upper_scope]
        moving_labels = {i.label for i in moving}
        init_up = tuple(a for a in m.init.actions if a.target == v.name)
        new_layer = replace(
            layer,
            variables=layer.variables + (v,),
            invariants=layer.invariants + tuple(moving),
            init=replace(layer.init, actions=layer.init.actions + init_up))
        new_subject = replace(
            m,
            variables=tuple(x for x in m.variables if x.name != v.name),
            invariants=tuple(i for i in m.invariants if i.label not in moving_labels),
            init=replace(m.init, actions=tuple(a for a in m.init.actions if a.target != v.name)))
        project = ctx.project.with_machine(new_layer).with_machine(new_subject)
        out.append(Attempt((v.name,), project))
    return out


@_operator("mergeVariable")
def merge_variable(ctx: OpContext) -> list[Attempt]:
    """Identify two same-typed variables, substituting a fresh one."""
    out: list[Attempt] = []
    m = ctx.subject
    vs = ctx.variables()
    for i, v1 in enumerate(vs):
        for v2 in vs[i + 1:]:
            binding = (v1.name, v2.name)
            if v1.type != v2.type or v1.functional != v2.functional:
                out.append(Attempt(binding, None, "types differ"))
                continue
            taken = {x.name for x in m.variables}
            fresh = _fresh_name(taken, f"{v1.name}_{v2.name}")

            def rn(e: Expr) -> Expr:
                return rename_ident(rename_ident(e, v1.name, fresh), v2.name, fresh)

            def rn_action(a: Action) -> Action:
                target = fresh if a.target in (v1.name, v2.name) else a.target
                return replace(a, target=target, rhs=rn(a.rhs),
                               index=rn(a.index) if a.index is not None else None)

            def rn_event(ev: Event) -> Event:
                return replace(
                    ev,
                    guards=tuple(replace(g, pred=rn(g.pred)) for g in ev.guards),
                    actions=tuple(rn_action(a) for a in ev.actions),
                    witnesses=tuple(replace(w, pred=rn(w.pred)) for w in ev.witnesses))

            variables = tuple(
                replace(v1, name=fresh) if x.name == v1.name else x
                for x in m.variables if x.name != v2.name)
            init_actions: list[Action] = []
            for a in map(rn_action, m.init.actions):
                if any(b.target == a.target and b.rhs == a.rhs and b.index == a.index
                       for b in init_actions):
                    continue  # both halves initialised identically
                init_actions.append(a)
            new = replace(
                m,
                variables=variables,
                invariants=tuple(replace(x, pred=rn(x.pred)) for x in m.invariants),
                init=replace(m.init, actions=tuple(init_actions)),
                events=tuple(rn_event(e) for e in m.events))
            out.append(Attempt(binding, ctx.project.with_machine(new)))
    return out
