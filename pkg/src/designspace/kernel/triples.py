"""Triple-graph interchange form for projects.

Every structural element becomes an entity with an opaque id and a payload;
structure is a set of (subject, relation, object) triples over the fixed
relation vocabulary. `refersTo` edges are derived data: they are recomputed
wholesale after any mutation rather than patched incrementally.

Carrier sets and constants record their owning context in their payload;
the relation vocabulary stays exactly as published.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .model import (Action, CarrierSet, Constant, Context, Event, Guard,
                    Invariant, Machine, Param, Project, Variable, Witness,
                    INIT_NAME)
from .terms import Expr, variable_refs

RELATIONS = frozenset({
    "refines", "sees", "hasVariable", "hasInvariant", "hasEvent",
    "hasParameter", "hasGuard", "hasAction", "hasWitness",
    "assigns", "refersTo",
})

ENTITY_KINDS = frozenset({
    "machine", "context", "variable", "invariant", "event", "parameter",
    "guard", "action", "witness", "carrier-set", "constant",
})


class StoreError(Exception):
    """The store does not describe a well-shaped project."""


@dataclass
class Entity:
    id: str
    kind: str
    payload: dict
    provenance: str = "source"


@dataclass
class TripleStore:
    entities: dict[str, Entity] = field(default_factory=dict)
    triples: set[tuple[str, str, str]] = field(default_factory=set)
    root: str = ""  # id of the root machine entity
    _counter: int = 0

    def fresh(self, kind: str, payload: dict, provenance: str = "source") -> Entity:
        if kind not in ENTITY_KINDS:
            raise ValueError(f"unknown entity kind {kind!r}")
        eid = f"e{self._counter}"
        self._counter += 1
        ent = Entity(eid, kind, payload, provenance)
        self.entities[eid] = ent
        return ent

    def add(self, subject: str, relation: str, obj: str):
        if relation not in RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        self.triples.add((subject, relation, obj))

    def out(self, subject: str, relation: str) -> list[Entity]:
        found = [self.entities[o] for s, r, o in self.triples
                 if s == subject and r == relation and o in self.entities]
        return sorted(found, key=lambda e: (e.payload.get("idx", 0), e.id))

    def of_kind(self, kind: str) -> list[Entity]:
        return sorted((e for e in self.entities.values() if e.kind == kind),
                      key=lambda e: (e.payload.get("idx", 0), e.id))


def _event_entity(store: TripleStore, ev: Event, idx: int, is_init: bool = False) -> Entity:
    ent = store.fresh("event", {"name": ev.name, "idx": idx, "init": is_init})
    for i, p in enumerate(ev.params):
        pe = store.fresh("parameter", {"name": p.name, "type": p.type, "idx": i})
        store.add(ent.id, "hasParameter", pe.id)
    for i, g in enumerate(ev.guards):
        ge = store.fresh("guard", {"label": g.label, "pred": g.pred, "idx": i})
        store.add(ent.id, "hasGuard", ge.id)
    for i, a in enumerate(ev.actions):
        ae = store.fresh("action", {"label": a.label, "target": a.target,
                                    "index": a.index, "rhs": a.rhs, "idx": i})
        store.add(ent.id, "hasAction", ae.id)
    for i, w in enumerate(ev.witnesses):
        we = store.fresh("witness", {"label": w.label, "pred": w.pred, "idx": i})
        store.add(ent.id, "hasWitness", we.id)
    return ent


def to_triples(project: Project) -> TripleStore:
    store = TripleStore()
    ctx_ids: dict[str, str] = {}
    for ci, c in enumerate(project.contexts):
        ce = store.fresh("context", {"name": c.name, "idx": ci})
        ctx_ids[c.name] = ce.id
        for i, s in enumerate(c.sets):
            store.fresh("carrier-set", {"name": s.name, "atoms": s.atoms,
                                        "context": c.name, "idx": i})
        for i, k in enumerate(c.constants):
            store.fresh("constant", {"name": k.name, "type": k.type,
                                     "value": k.value, "context": c.name, "idx": i})
    mach_ids: dict[str, str] = {}
    for mi, m in enumerate(project.machines):
        me = store.fresh("machine", {"name": m.name, "idx": mi,
                                     "sees_order": m.sees})
        mach_ids[m.name] = me.id
        for i, v in enumerate(m.variables):
            ve = store.fresh("variable", {"name": v.name, "type": v.type,
                                          "functional": v.functional, "idx": i})
            store.add(me.id, "hasVariable", ve.id)
        for i, inv in enumerate(m.invariants):
            ie = store.fresh("invariant", {"label": inv.label, "pred": inv.pred,
                                           "user_given": inv.user_given, "idx": i})
            store.add(me.id, "hasInvariant", ie.id)
        init_ent = _event_entity(store, m.init, -1, is_init=True)
        store.add(me.id, "hasEvent", init_ent.id)
        for i, ev in enumerate(m.events):
            ee = _event_entity(store, ev, i)
            store.add(me.id, "hasEvent", ee.id)
    for m in project.machines:
        me = mach_ids[m.name]
        if m.refines is not None and m.refines in mach_ids:
            store.add(me, "refines", mach_ids[m.refines])
        for s in m.sees:
            if s in ctx_ids:
                store.add(me, "sees", ctx_ids[s])
    if project.root in mach_ids:
        store.root = mach_ids[project.root]
    recompute_refs(store)
    return store


def _owners_of_event(store: TripleStore, event_id: str) -> list[Entity]:
    return [store.entities[s] for s, r, o in store.triples
            if r == "hasEvent" and o == event_id and s in store.entities]


def _visible_variables(store: TripleStore, machine_id: str) -> dict[str, str]:
    """Variable name -> entity id, walking the refinement chain."""
    chain: list[str] = []
    cur: str | None = machine_id
    seen: set[str] = set()
    while cur is not None and cur not in seen:
        seen.add(cur)
        chain.append(cur)
        sup = [o for s, r, o in store.triples if s == cur and r == "refines"]
        cur = sup[0] if sup else None
    visible: dict[str, str] = {}
    for mid in reversed(chain):  # concrete shadows abstract
        for ve in store.out(mid, "hasVariable"):
            visible[ve.payload["name"]] = ve.id
    return visible


def recompute_refs(store: TripleStore):
    """Drop and rederive every refersTo and assigns triple."""
    store.triples = {t for t in store.triples if t[1] not in ("refersTo", "assigns")}
    for me in store.of_kind("machine"):
        visible = _visible_variables(store, me.id)

        def link_refs(ent: Entity, exprs: list[Expr | None]):
            names: set[str] = set()
            for e in exprs:
                if e is not None:
                    names |= variable_refs(e)
            for n in names:
                if n in visible:
                    store.add(ent.id, "refersTo", visible[n])

        for ie in store.out(me.id, "hasInvariant"):
            link_refs(ie, [ie.payload["pred"]])
        for ee in store.out(me.id, "hasEvent"):
            for ge in store.out(ee.id, "hasGuard"):
                link_refs(ge, [ge.payload["pred"]])
            for we in store.out(ee.id, "hasWitness"):
                link_refs(we, [we.payload["pred"]])
            for ae in store.out(ee.id, "hasAction"):
                link_refs(ae, [ae.payload["rhs"], ae.payload["index"]])
                target = ae.payload["target"]
                if target in visible:
                    store.add(ae.id, "assigns", visible[target])


def _event_from_entity(store: TripleStore, ee: Entity) -> Event:
    params = tuple(Param(p.payload["name"], p.payload["type"])
                   for p in store.out(ee.id, "hasParameter"))
    guards = tuple(Guard(g.payload["label"], g.payload["pred"])
                   for g in store.out(ee.id, "hasGuard"))
    actions = tuple(Action(a.payload["label"], a.payload["target"],
                           a.payload["rhs"], a.payload["index"])
                    for a in store.out(ee.id, "hasAction"))
    witnesses = tuple(Witness(w.payload["label"], w.payload["pred"])
                      for w in store.out(ee.id, "hasWitness"))
    return Event(ee.payload["name"], params, guards, actions, witnesses)


def from_triples(store: TripleStore) -> Project:
    for s, r, o in store.triples:
        if s not in store.entities or o not in store.entities:
            raise StoreError(f"dangling triple ({s}, {r}, {o})")

    contexts: list[Context] = []
    for ce in store.of_kind("context"):
        name = ce.payload["name"]
        sets = tuple(CarrierSet(e.payload["name"], tuple(e.payload["atoms"]))
                     for e in store.of_kind("carrier-set") if e.payload.get("context") == name)
        constants = tuple(Constant(e.payload["name"], e.payload["type"], e.payload["value"])
                          for e in store.of_kind("constant") if e.payload.get("context") == name)
        contexts.append(Context(name, sets, constants))

    id_to_name = {e.id: e.payload["name"] for e in store.entities.values()
                  if e.kind in ("machine", "context")}
    machines: list[Machine] = []
    for me in store.of_kind("machine"):
        refines_ids = [o for s, r, o in store.triples if s == me.id and r == "refines"]
        if len(refines_ids) > 1:
            raise StoreError(f"machine {me.payload['name']} refines several machines")
        sees_ids = [o for s, r, o in store.triples if s == me.id and r == "sees"]
        variables = tuple(Variable(v.payload["name"], v.payload["type"],
                                   v.payload.get("functional", False))
                          for v in store.out(me.id, "hasVariable"))
        invariants = tuple(Invariant(i.payload["label"], i.payload["pred"],
                                     i.payload.get("user_given", True))
                           for i in store.out(me.id, "hasInvariant"))
        init = Event(INIT_NAME)
        events: list[Event] = []
        for ee in store.out(me.id, "hasEvent"):
            owners = _owners_of_event(store, ee.id)
            if len(owners) != 1 or owners[0].id != me.id:
                raise StoreError("event with ambiguous owner")
            if ee.payload.get("init"):
                init = _event_from_entity(store, ee)
            else:
                events.append(_event_from_entity(store, ee))
        order = list(me.payload.get("sees_order", ()))
        sees_names = sorted(
            (id_to_name[i] for i in sees_ids if i in id_to_name),
            key=lambda n: (order.index(n) if n in order else len(order), n))
        machines.append(Machine(
            me.payload["name"],
            id_to_name.get(refines_ids[0]) if refines_ids else None,
            tuple(sees_names), variables, invariants, init, tuple(events)))

    names = [m.name for m in machines] + [c.name for c in contexts]
    if len(names) != len(set(names)):
        raise StoreError("duplicate unit names in store")
    root = ""
    if store.root:
        ent = store.entities.get(store.root)
        if ent is None or ent.kind != "machine":
            raise StoreError("root does not name a machine entity")
        root = ent.payload["name"]
    return Project(tuple(contexts), tuple(machines), root)
