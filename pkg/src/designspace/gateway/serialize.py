"""JSON shapes shared by the command line and the HTTP service.

Everything the gateway emits funnels through here so the two front ends
cannot drift apart: a trace printed by `designspace simulate` has the
same structure as one embedded in an analysis report served over HTTP.
"""

from __future__ import annotations

from ..animator.explore import ExploreResult
from ..animator.sim import EventInstance
from ..animator.trace import ReplayResult, Trace
from ..former.tables import DataTable
from ..kernel.diffing import Edit
from ..kernel.model import Action, Context, Event, Invariant, Machine, Variable
from ..kernel.terms import Atom, Pair, Value, value_key
from ..surface.printer import (
    _render_event,
    render_context,
    render_decl_type,
    render_expr,
    render_machine,
)


def value_json(v: Value):
    """Map a model value onto plain JSON. Sets become sorted lists and
    pairs two-element lists; ints, bools and atom names pass through."""
    if isinstance(v, Atom):
        return v.name
    if isinstance(v, Pair):
        return [value_json(v.left), value_json(v.right)]
    if isinstance(v, frozenset):
        return [value_json(x) for x in sorted(v, key=value_key)]
    return v


def state_json(state: dict) -> dict:
    return {name: value_json(state[name]) for name in sorted(state)}


def instance_json(inst: EventInstance) -> dict:
    return {"event": inst.event,
            "args": {n: value_json(v) for n, v in inst.binding}}


def trace_json(trace: Trace) -> dict:
    return {
        "init": state_json(trace.init),
        "steps": [{"fire": instance_json(s.instance),
                   "post": state_json(s.post)} for s in trace.steps],
    }


def flaws_json(flaws) -> list[dict]:
    return [f.as_dict() for f in
            sorted(flaws, key=lambda f: (f.kind, f.subject, f.detail))]


def explore_json(res: ExploreResult) -> dict:
    return {
        "nStates": res.n_states,
        "nTransitions": res.n_transitions,
        "violatedInvariants": sorted(res.violated_labels),
        "deadlocks": [state_json(s) for s in res.deadlocks],
        "deadlockWitnesses": [
            [instance_json(s.instance) for s in t.steps]
            for t in res.deadlock_traces],
        "flaws": flaws_json(res.flaws),
        "partial": res.partial,
        "traces": [trace_json(t) for t in res.traces],
    }


def replay_json(res: ReplayResult) -> dict:
    return {
        "trace": trace_json(res.trace),
        "violations": [{"step": i, "invariants": labs}
                       for i, labs in res.violations if labs],
        "flaws": flaws_json(res.flaws),
    }


def table_json(t: DataTable) -> dict:
    return {
        "defn": t.defn,
        "depth": t.depth,
        "columns": list(t.columns),
        "rows": [[value_json(c) for c in row] for row in t.sorted_rows()],
    }


def tables_json(tables: dict[str, DataTable]) -> dict:
    return {name: table_json(tables[name]) for name in sorted(tables)}


def _edit_detail(item) -> str | None:
    # the payload pretty-printed in surface syntax, one entity per edit
    if item is None:
        return None
    if isinstance(item, Event):
        return "\n".join(_render_event(item))
    if isinstance(item, Variable):
        return f"{item.name} : {render_decl_type(item)}"
    if isinstance(item, Invariant):
        return f"{item.label}: {render_expr(item.pred)}"
    if isinstance(item, Action):
        return f"{item.label}: {render_expr(item.lhs)} := {render_expr(item.rhs)}"
    if isinstance(item, Machine):
        return render_machine(item)
    if isinstance(item, Context):
        return render_context(item)
    if isinstance(item, tuple):  # machine head: (refines, sees)
        refines, sees = item
        parts = []
        if refines:
            parts.append(f"refines {refines}")
        if sees:
            parts.append("sees " + ", ".join(sees))
        return "; ".join(parts) if parts else "(plain machine)"
    return str(item)


def edit_json(e: Edit) -> dict:
    out: dict = {"op": e.op, "name": e.name}
    if e.machine is not None:
        out["machine"] = e.machine
    detail = _edit_detail(e.item)
    if detail is not None:
        out["detail"] = detail
    return out


def edits_json(edits: list[Edit]) -> list[dict]:
    return [edit_json(e) for e in edits]


def alternative_json(alt, include_sources: bool = False) -> dict:
    from ..kernel.hashing import canonical_hash
    from ..surface.printer import render_project

    out = {
        "hash": canonical_hash(alt.project),
        "provenance": [[op, list(args)] for op, args in alt.provenance],
        "thread": alt.thread,
    }
    if include_sources:
        manifest, files = render_project(alt.project)
        out["sources"] = {"manifest": manifest, "files": files}
    return out


def discard_json(d) -> dict:
    return {
        "op": d.op,
        "bindings": list(d.bindings),
        "reason": d.reason,
        "provenance": [[op, list(args)] for op, args in d.provenance],
    }
