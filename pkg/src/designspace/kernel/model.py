"""Structural model: contexts, machines, events, and whole projects.

A project is a closed world: every carrier set is a finite atom enumeration
and every constant has a ground value, so machines can be executed directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .terms import Atom, Expr, Type, Value, variable_refs, refs_name

INIT_NAME = "INITIALISATION"


@dataclass(frozen=True, slots=True)
class Param:
    name: str
    type: Type


@dataclass(frozen=True, slots=True)
class Guard:
    label: str
    pred: Expr


@dataclass(frozen=True, slots=True)
class Action:
    """`target := rhs`, or the pointwise form `target(index) := rhs`."""

    label: str
    target: str
    rhs: Expr
    index: Expr | None = None

    def reads(self) -> set[str]:
        out = variable_refs(self.rhs)
        if self.index is not None:
            out |= variable_refs(self.index)
        return out


@dataclass(frozen=True, slots=True)
class Witness:
    label: str
    pred: Expr


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    type: Type
    functional: bool = False


@dataclass(frozen=True, slots=True)
class Invariant:
    label: str
    pred: Expr
    user_given: bool = True


@dataclass(frozen=True, slots=True)
class Event:
    name: str
    params: tuple[Param, ...] = ()
    guards: tuple[Guard, ...] = ()
    actions: tuple[Action, ...] = ()
    witnesses: tuple[Witness, ...] = ()

    def assigned(self) -> set[str]:
        return {a.target for a in self.actions}

    def guard_reads(self) -> set[str]:
        out: set[str] = set()
        for g in self.guards:
            out |= variable_refs(g.pred)
        return out

    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)


@dataclass(frozen=True, slots=True)
class CarrierSet:
    name: str
    atoms: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Constant:
    name: str
    type: Type
    value: Value


@dataclass(frozen=True, slots=True)
class Context:
    name: str
    sets: tuple[CarrierSet, ...] = ()
    constants: tuple[Constant, ...] = ()


@dataclass(frozen=True, slots=True)
class Machine:
    name: str
    refines: str | None = None
    sees: tuple[str, ...] = ()
    variables: tuple[Variable, ...] = ()
    invariants: tuple[Invariant, ...] = ()
    init: Event = Event(INIT_NAME)
    events: tuple[Event, ...] = ()

    def variable(self, name: str) -> Variable | None:
        for v in self.variables:
            if v.name == name:
                return v
        return None

    def event(self, name: str) -> Event | None:
        for e in self.events:
            if e.name == name:
                return e
        return None


@dataclass(frozen=True, slots=True)
class Project:
    contexts: tuple[Context, ...] = ()
    machines: tuple[Machine, ...] = ()
    root: str = ""

    def machine(self, name: str) -> Machine:
        for m in self.machines:
            if m.name == name:
                return m
        raise KeyError(f"no machine named {name!r}")

    def context(self, name: str) -> Context:
        for c in self.contexts:
            if c.name == name:
                return c
        raise KeyError(f"no context named {name!r}")

    def root_machine(self) -> Machine:
        return self.machine(self.root)

    def refinement_chain(self, name: str) -> list[Machine]:
        """The machine and its abstract ancestors, concrete first."""
        chain, seen = [], set()
        cur: str | None = name
        while cur is not None and cur not in seen:
            seen.add(cur)
            m = self.machine(cur)
            chain.append(m)
            cur = m.refines
        return chain

    def visible_contexts(self, machine: str) -> list[Context]:
        names: list[str] = []
        for m in self.refinement_chain(machine):
            for s in m.sees:
                if s not in names:
                    names.append(s)
        return [self.context(n) for n in names]

    def scope(self, machine: str) -> "Scope":
        return Scope.of(self, machine)

    def with_machine(self, updated: Machine) -> "Project":
        machines = tuple(updated if m.name == updated.name else m for m in self.machines)
        return replace(self, machines=machines)


@dataclass(frozen=True)
class Scope:
    """Name resolution environment for one machine of a project."""

    variables: dict[str, Variable]
    constants: dict[str, Constant]
    atoms: dict[str, str]        # atom name -> carrier set name
    carriers: dict[str, tuple[str, ...]]

    @staticmethod
    def of(project: Project, machine: str) -> "Scope":
        variables: dict[str, Variable] = {}
        # concrete declarations shadow same-named abstract ones
        for m in reversed(project.refinement_chain(machine)):
            for v in m.variables:
                variables[v.name] = v
        constants: dict[str, Constant] = {}
        atoms: dict[str, str] = {}
        carriers: dict[str, tuple[str, ...]] = {}
        for c in project.visible_contexts(machine):
            for s in c.sets:
                carriers[s.name] = s.atoms
                for a in s.atoms:
                    atoms[a] = s.name
            for k in c.constants:
                constants[k.name] = k
        return Scope(variables, constants, atoms, carriers)


def events_reading(machine: Machine, var: str) -> list[Event]:
    return [e for e in machine.events if var in e.guard_reads()]


def events_assigning(machine: Machine, var: str) -> list[Event]:
    return [e for e in machine.events if var in e.assigned()]


def machine_refs(machine: Machine, name: str) -> bool:
    """Does any guard, action, invariant, or witness mention `name`?"""
    for inv in machine.invariants:
        if refs_name(inv.pred, name):
            return True
    for e in (machine.init, *machine.events):
        for g in e.guards:
            if refs_name(g.pred, name):
                return True
        for a in e.actions:
            if a.target == name or refs_name(a.rhs, name):
                return True
            if a.index is not None and refs_name(a.index, name):
                return True
        for w in e.witnesses:
            if refs_name(w.pred, name):
                return True
    return False
