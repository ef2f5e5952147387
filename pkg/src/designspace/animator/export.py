"""Turn a trace into data tables.

Post-states are renumbered 0..n-1; the initial state is not exported.
Each variable becomes one table keyed by state id, with one row per
element for set-valued variables. Two bookkeeping tables join them:
event(s, e) names the event that produced each state, good(s) lists the
states satisfying every invariant. Integer-valued constants export as
per-state tables so later analysis can relate them to sums and counts.
"""
from __future__ import annotations

from ..kernel.terms import (Pair, Type, Value, flatten_type, flatten_value,
                            value_key)
from ..former.tables import DataTable, table
from .sim import FlatModel, check_invariants
from .trace import Trace

_KIND_LETTER = {"carrier": "a", "int": "i", "bool": "b"}


def _column_names(components: list[Type]) -> list[str]:
    letters = [_KIND_LETTER.get(t.kind, "x") for t in components]
    names = []
    for i, letter in enumerate(letters):
        if letters.count(letter) == 1:
            names.append(letter)
        else:
            names.append(f"{letter}{letters[:i + 1].count(letter)}")
    return names


def _ints_in(v: Value):
    if isinstance(v, bool):
        return
    if isinstance(v, int):
        yield v
    elif isinstance(v, Pair):
        yield from _ints_in(v.left)
        yield from _ints_in(v.right)
    elif isinstance(v, frozenset):
        for x in v:
            yield from _ints_in(x)


def _component_domain(model: FlatModel, t: Type,
                      int_sample: frozenset) -> frozenset:
    if t.kind == "carrier":
        return frozenset(model.atoms.get(t.name, []))
    if t.kind == "int":
        return int_sample
    if t.kind == "bool":
        return frozenset({False, True})
    return frozenset()


def export_tables(model: FlatModel, trace: Trace) -> dict[str, DataTable]:
    states = trace.states()
    posts = states[1:]
    ids = frozenset(range(len(posts)))

    seen_ints = {0}
    for st in posts:
        for v in st.values():
            seen_ints.update(_ints_in(v))
    for v in model.constants.values():
        seen_ints.update(_ints_in(v))
    int_sample = frozenset(range(0, max(seen_ints) + 1))

    out: dict[str, DataTable] = {}
    for var in model.variables:
        if var.type.kind == "set":
            components = flatten_type(var.type.args[0])
            per_element = True
        else:
            components = flatten_type(var.type)
            per_element = False
        cols = ["s"] + _column_names(components)
        domains = {"s": ids}
        for name, t in zip(cols[1:], components):
            domains[name] = _component_domain(model, t, int_sample)
        rows = []
        for sid, st in enumerate(posts):
            val = st.get(var.name)
            if val is None:
                continue
            if per_element:
                for el in sorted(val, key=value_key):
                    rows.append((sid, *flatten_value(el)))
            else:
                rows.append((sid, *flatten_value(val)))
        out[var.name] = table(var.name, cols, rows, domains,
                              depth=0, symbols={var.name})

    event_names = frozenset(e.name for e in model.events())
    out["event"] = table(
        "event", ("s", "e"),
        [(sid, trace.producer(sid)) for sid in range(len(posts))],
        {"s": ids, "e": event_names}, depth=0, symbols={"event"})

    good_rows = []
    for sid, st in enumerate(posts):
        violated, flaws = check_invariants(model, st)
        if not violated and not flaws:
            good_rows.append((sid,))
    out["good"] = table("good", ("s",), good_rows, {"s": ids},
                        depth=0, symbols={"good"})

    for name, val in sorted(model.constants.items()):
        if isinstance(val, int) and not isinstance(val, bool):
            out[name] = table(
                name, ("s", "i"), [(sid, val) for sid in sorted(ids)],
                {"s": ids, "i": int_sample}, depth=0, symbols={name})
    return out
