"""Structural diffs between projects.

Edits are expressed at entity granularity - whole variables, invariants,
events, init actions, contexts - keyed by name (or label), never by
position. Applying diff(a, b) to a yields a project with the same
canonical hash as b; declaration order is not reconstructed, which is
exactly the insensitivity the hash guarantees.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .model import (Action, Context, Event, Invariant, Machine, Project,
                    Variable)

# op vocabulary, one add/remove/modify family per entity kind
_FAMILIES = ("context", "machine", "variable", "invariant", "event",
             "init-action")


@dataclass(frozen=True)
class Edit:
    op: str                      # e.g. "add-event", "remove-variable"
    name: str                    # entity key: name or invariant label
    machine: Optional[str] = None  # owning machine for machine-scoped kinds
    item: object = None          # payload for add/modify ops

    def sort_key(self):
        return (self.op, self.machine or "", self.name)


def _by_name(items, key=lambda x: x.name):
    return {key(x): x for x in items}


def _unlabeled(x):
    """Guard/action/witness labels are bookkeeping, not content."""
    if isinstance(x, Event):
        return replace(
            x,
            guards=tuple(replace(g, label="") for g in x.guards),
            actions=tuple(replace(a, label="") for a in x.actions),
            witnesses=tuple(replace(w, label="") for w in x.witnesses))
    if isinstance(x, Action):
        return replace(x, label="")
    return x


def _diff_keyed(kind: str, machine: str | None, old: dict, new: dict,
                out: list[Edit]):
    for k in old:
        if k not in new:
            out.append(Edit(f"remove-{kind}", k, machine))
        elif _unlabeled(old[k]) != _unlabeled(new[k]):
            out.append(Edit(f"modify-{kind}", k, machine, new[k]))
    for k in new:
        if k not in old:
            out.append(Edit(f"add-{kind}", k, machine, new[k]))


def _diff_machine(a: Machine, b: Machine, out: list[Edit]):
    if a.refines != b.refines or a.sees != b.sees:
        out.append(Edit("modify-machine-head", b.name, b.name,
                        (b.refines, b.sees)))
    _diff_keyed("variable", a.name, _by_name(a.variables), _by_name(b.variables), out)
    _diff_keyed("invariant", a.name,
                _by_name(a.invariants, lambda i: i.label),
                _by_name(b.invariants, lambda i: i.label), out)
    _diff_keyed("event", a.name, _by_name(a.events), _by_name(b.events), out)
    _diff_keyed("init-action", a.name,
                _by_name(a.init.actions, lambda x: x.target),
                _by_name(b.init.actions, lambda x: x.target), out)


def diff(a: Project, b: Project) -> list[Edit]:
    out: list[Edit] = []
    if a.root != b.root:
        out.append(Edit("set-root", b.root))
    _diff_keyed("context", None, _by_name(a.contexts), _by_name(b.contexts), out)
    am, bm = _by_name(a.machines), _by_name(b.machines)
    for name in am:
        if name not in bm:
            out.append(Edit("remove-machine", name))
        else:
            _diff_machine(am[name], bm[name], out)
    for name in bm:
        if name not in am:
            out.append(Edit("add-machine", name, item=bm[name]))
    return sorted(out, key=Edit.sort_key)


class EditError(Exception):
    """An edit did not apply cleanly to the given project."""


def _apply_to_machine(m: Machine, e: Edit) -> Machine:
    kind = e.op.split("-", 1)[1]
    if e.op == "modify-machine-head":
        refines, sees = e.item
        return replace(m, refines=refines, sees=sees)
    if kind == "variable":
        items, key = m.variables, lambda v: v.name
    elif kind == "invariant":
        items, key = m.invariants, lambda i: i.label
    elif kind == "event":
        items, key = m.events, lambda ev: ev.name
    elif kind == "init-action":
        items, key = m.init.actions, lambda a: a.target
    else:
        raise EditError(f"unknown edit {e.op}")
    if e.op.startswith("remove-"):
        new = tuple(x for x in items if key(x) != e.name)
        if len(new) == len(items):
            raise EditError(f"{e.op} {e.name}: no such entity in {m.name}")
    elif e.op.startswith("add-"):
        if any(key(x) == e.name for x in items):
            raise EditError(f"{e.op} {e.name}: already present in {m.name}")
        new = items + (e.item,)
    else:  # modify
        if not any(key(x) == e.name for x in items):
            raise EditError(f"{e.op} {e.name}: no such entity in {m.name}")
        new = tuple(e.item if key(x) == e.name else x for x in items)
    if kind == "init-action":
        return replace(m, init=replace(m.init, actions=new))
    return replace(m, **{kind + "s": new})


def apply(edits: list[Edit], project: Project) -> Project:
    p = project
    for e in edits:
        if e.op == "set-root":
            p = replace(p, root=e.name)
        elif e.op == "add-context":
            p = replace(p, contexts=p.contexts + (e.item,))
        elif e.op == "remove-context":
            p = replace(p, contexts=tuple(c for c in p.contexts if c.name != e.name))
        elif e.op == "modify-context":
            p = replace(p, contexts=tuple(e.item if c.name == e.name else c
                                          for c in p.contexts))
        elif e.op == "add-machine":
            p = replace(p, machines=p.machines + (e.item,))
        elif e.op == "remove-machine":
            p = replace(p, machines=tuple(m for m in p.machines if m.name != e.name))
        else:
            try:
                m = p.machine(e.machine or "")
            except KeyError:
                raise EditError(f"{e.op} {e.name}: unknown machine {e.machine}") from None
            p = p.with_machine(_apply_to_machine(m, e))
    return p
