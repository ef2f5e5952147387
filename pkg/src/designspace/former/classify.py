"""Sort raw conjectures into the shapes a designer acts on.

Three templates matter: conjectures that characterise failure states
(these point at the events and variables to repair), equivalences that
extend a stated invariant with extra terms (candidate replacement
invariants), and equivalences bridging an abstract and a concrete
variable set (candidate gluing invariants). Everything else is kept
but tagged plain.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..animator.sim import FlatModel
from ..kernel.terms import idents
from .exprform import conjecture_predicate
from .theory import Conjecture, Theory

NOT_GOOD = "negate(good)"


def _bad_extension(theory: Theory):
    """Rowset of the bad-state concept, wherever it ended up.

    The complement of good may have deduplicated against an earlier
    concept with the same extension; the iff recorded at that moment
    still carries the table, so look in both places.
    """
    for t in theory.concepts:
        if t.defn == NOT_GOOD:
            return t.rows
    for c in theory.conjectures:
        for side in (c.lhs, c.rhs):
            if side.defn == NOT_GOOD:
                return side.rows
    return None


def _failure_linked(c: Conjecture, bad_rows) -> bool:
    if NOT_GOOD in c.lhs.defn or NOT_GOOD in c.rhs.defn:
        return True
    return bad_rows is not None and bad_rows in (c.lhs.rows, c.rhs.rows)


def _split_events(c: Conjecture, event_names: frozenset) -> set[str]:
    found = set()
    for side in (c.lhs, c.rhs):
        for d in side.history:
            if d.rule == "split" and len(d.params) == 2:
                value = d.params[1]
                if isinstance(value, str) and value in event_names:
                    found.add(value)
    return found


@dataclass
class AnalysisReport:
    conjectures: list = field(default_factory=list)   # all, tagged, discovery order
    ranked: list = field(default_factory=list)        # template classes only
    focus_events: tuple = ()
    focus_variables: tuple = ()
    adaptations: tuple = ()                           # rendered predicates
    gluings: list = field(default_factory=list)
    near_properties: tuple = ()
    partial: bool = False

    def as_dict(self) -> dict:
        return {
            "conjectures": [c.as_dict() for c in self.conjectures],
            "ranked": [c.as_dict() for c in self.ranked],
            "focus": {"events": list(self.focus_events),
                      "variables": list(self.focus_variables)},
            "adaptations": list(self.adaptations),
            "gluings": [c.as_dict() for c in self.gluings],
            "nearProperties": [p.as_dict() for p in self.near_properties],
            "partial": self.partial,
        }


def _rank_key(c: Conjecture):
    return (-c.support, c.definition_size(), c.index)


def classify(theory: Theory, model: FlatModel, near_properties=(),
             gluings=()) -> AnalysisReport:
    var_names = frozenset(v.name for v in model.variables)
    const_names = frozenset(model.constants)
    event_names = frozenset(e.name for e in model.events())

    inv_symbol_sets = []
    for _, inv in model.invariants:
        syms = {n for n, _ in idents(inv.pred)} & (var_names | const_names)
        if syms:
            inv_symbol_sets.append(frozenset(syms))

    tagged: list[Conjecture] = []
    focus_events: set[str] = set()
    focus_variables: set[str] = set()
    adaptations: list[str] = []

    bad_rows = _bad_extension(theory)
    for c in theory.conjectures:
        tags = set()
        if _failure_linked(c, bad_rows):
            tags.add("failure-linked")
            focus_events |= _split_events(c, event_names)
            focus_variables |= (c.lhs.symbols | c.rhs.symbols) & var_names
        combined = (c.lhs.symbols | c.rhs.symbols) & (var_names | const_names)
        for inv_syms in inv_symbol_sets:
            if inv_syms < combined:          # the invariant plus extra terms
                rendered = conjecture_predicate(c)
                if rendered is not None:
                    tags.add("invariant-adaptation")
                    if rendered not in adaptations:
                        adaptations.append(rendered)
                break
        if not tags:
            tags.add("plain")
        tagged.append(c.tagged(tags))

    # implicated events widen the variable focus through their guards
    for name in sorted(focus_events):
        ev = model.event(name)
        if ev is None:
            continue
        for g in ev.guards:
            focus_variables |= {n for n, _ in idents(g.pred)} & var_names

    glue_list = list(gluings)
    ranked = (
        sorted((c for c in tagged if "failure-linked" in c.tags), key=_rank_key)
        + sorted((c for c in tagged if "invariant-adaptation" in c.tags
                  and "failure-linked" not in c.tags), key=_rank_key)
        + sorted(glue_list, key=_rank_key)
    )
    return AnalysisReport(
        conjectures=tagged,
        ranked=ranked,
        focus_events=tuple(sorted(focus_events)),
        focus_variables=tuple(sorted(focus_variables)),
        adaptations=tuple(adaptations),
        gluings=glue_list,
        near_properties=tuple(near_properties),
        partial=theory.partial,
    )
