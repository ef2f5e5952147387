"""Canonical content hashing for projects.

Two projects hash equal iff they describe the same design up to
presentation: ordering of declarations (variables, invariants, events,
guards, actions, parameters) and of set-literal elements does not matter,
and neither do guard/action/invariant labels, which are bookkeeping
rather than meaning. Everything else - names, types, expressions,
constant values, the refinement/sees wiring - is hashed.
"""
from __future__ import annotations

import hashlib

from .model import Event, Machine, Project
from .terms import Expr, Type, value_key


def _enc_type(t: Type):
    return ("T", t.kind, t.name, tuple(_enc_type(a) for a in t.args))


def _enc_value(v) -> str:
    return value_key(v)


def _enc_expr(e: Expr):
    kids = tuple(_enc_expr(k) for k in e.kids)
    if e.kind == "setlit":
        kids = tuple(sorted(kids))
    if e.value is None:
        val = None
    elif isinstance(e.value, str):  # identifier name
        val = e.value
    else:
        val = _enc_value(e.value)
    return (e.kind, val, e.ref, kids)


def _enc_event(ev: Event, is_init: bool = False):
    params = tuple(sorted((p.name, _enc_type(p.type)) for p in ev.params))
    guards = tuple(sorted(_enc_expr(g.pred) for g in ev.guards))
    actions = tuple(sorted(
        (a.target,
         _enc_expr(a.index) if a.index is not None else None,
         _enc_expr(a.rhs))
        for a in ev.actions))
    witnesses = tuple(sorted(_enc_expr(w.pred) for w in ev.witnesses))
    name = "" if is_init else ev.name
    return ("E", name, params, guards, actions, witnesses)


def _enc_machine(m: Machine):
    variables = tuple(sorted(
        (v.name, _enc_type(v.type), v.functional) for v in m.variables))
    invariants = tuple(sorted(_enc_expr(i.pred) for i in m.invariants))
    events = tuple(sorted(_enc_event(e) for e in m.events))
    return ("M", m.name, m.refines or "", tuple(sorted(m.sees)),
            variables, invariants, _enc_event(m.init, is_init=True), events)


def encode(project: Project):
    contexts = tuple(sorted(
        ("C", c.name,
         tuple((s.name, s.atoms) for s in c.sets),
         tuple(sorted((k.name, _enc_type(k.type), _enc_value(k.value))
                      for k in c.constants)))
        for c in project.contexts))
    machines = tuple(sorted(_enc_machine(m) for m in project.machines))
    return ("P", project.root, contexts, machines)


def canonical_hash(project: Project) -> str:
    return hashlib.sha256(repr(encode(project)).encode()).hexdigest()
