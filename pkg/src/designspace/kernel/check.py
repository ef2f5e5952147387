"""Type inference and machine well-formedness.

`infer` is a one-pass bottom-up checker; empty set literals type as
POW(any) and unify upward. Well-formedness is what transformation
operators use to discard broken alternatives, so it has to be total:
it collects problems instead of raising.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import Event, Machine, Project, Scope, INIT_NAME
from .terms import (ANY, BOOL, INT, Expr, Type, carrier, compatible,
                    is_set_of_pairs, merge_types, pair_type, set_of)


class TypeProblem(Exception):
    def __init__(self, message: str, node: Expr):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class Problem:
    message: str
    node: Expr | None = None

    def __str__(self) -> str:
        return self.message


def infer(e: Expr, scope: Scope, params: dict[str, Type]) -> Type:
    def fail(msg: str, node: Expr) -> Type:
        raise TypeProblem(msg, node)

    def go(n: Expr) -> Type:
        k = n.kind
        if k == "int":
            return INT
        if k == "bool":
            return BOOL
        if k == "atom":
            cs = scope.atoms.get(n.value)
            if cs is None:
                return fail(f"unknown atom {n.value!r}", n)
            return carrier(cs)
        if k == "ident":
            name = n.value
            if name in params:
                return params[name]
            if name in scope.variables:
                return scope.variables[name].type
            if name in scope.constants:
                return scope.constants[name].type
            return fail(f"unresolved identifier {name!r}", n)
        if k == "maplet":
            return pair_type(go(n.kids[0]), go(n.kids[1]))
        if k == "setlit":
            elem = ANY
            for kid in n.kids:
                t = go(kid)
                if not compatible(elem, t):
                    return fail("mixed element types in set literal", n)
                elem = merge_types(elem, t)
            return set_of(elem)
        if k in ("union", "setminus", "override"):
            a, b = go(n.kids[0]), go(n.kids[1])
            if a.kind != "set" and a.kind != "any":
                return fail(f"{k} needs set operands", n)
            if not compatible(a, b):
                return fail(f"{k} over mismatched set types", n)
            t = merge_types(a, b)
            if k == "override" and not (is_set_of_pairs(t) or t.args[0].kind == "any"):
                return fail("<+ needs a set of pairs", n)
            return t
        if k in ("in", "notin"):
            elem, s = go(n.kids[0]), go(n.kids[1])
            if s.kind != "set":
                return fail("membership needs a set on the right", n)
            if not compatible(set_of(elem), s):
                return fail("element type does not match set", n)
            return BOOL
        if k == "apply":
            f, x = go(n.kids[0]), go(n.kids[1])
            if not is_set_of_pairs(f):
                return fail("application needs a set of pairs", n)
            dom_t, ran_t = f.args[0].args
            if not compatible(dom_t, x):
                return fail("argument type does not match domain", n)
            return ran_t
        if k == "dom":
            f = go(n.kids[0])
            if not is_set_of_pairs(f):
                return fail("dom needs a set of pairs", n)
            return set_of(f.args[0].args[0])
        if k == "card":
            s = go(n.kids[0])
            if s.kind != "set":
                return fail("card needs a set", n)
            return INT
        if k == "sum":
            f = go(n.kids[0])
            if not is_set_of_pairs(f) or not compatible(f.args[0].args[1], INT):
                return fail("SIGMA needs a set of pairs with integer second components", n)
            return INT
        if k in ("add", "sub"):
            a, b = go(n.kids[0]), go(n.kids[1])
            if not (compatible(a, INT) and compatible(b, INT)):
                return fail("arithmetic needs integers", n)
            return INT
        if k == "not":
            if not compatible(go(n.kids[0]), BOOL):
                return fail("negation needs a predicate", n)
            return BOOL
        if k in ("and", "or", "implies"):
            for kid in n.kids:
                if not compatible(go(kid), BOOL):
                    return fail(f"{k} needs predicates", n)
            return BOOL
        if k in ("eq", "ne"):
            a, b = go(n.kids[0]), go(n.kids[1])
            if not compatible(a, b):
                return fail("comparison over mismatched types", n)
            return BOOL
        if k in ("lt", "le", "gt", "ge"):
            a, b = go(n.kids[0]), go(n.kids[1])
            if not (compatible(a, INT) and compatible(b, INT)):
                return fail("ordering needs integers", n)
            return BOOL
        raise AssertionError(k)

    return go(e)


def _predicate_problems(e: Expr, scope: Scope, params: dict[str, Type], where: str) -> list[Problem]:
    try:
        t = infer(e, scope, params)
    except TypeProblem as tp:
        return [Problem(f"{where}: {tp}", tp.node)]
    if not compatible(t, BOOL):
        return [Problem(f"{where}: not a predicate", e)]
    return []


def _event_problems(project: Project, machine: Machine, ev: Event, scope: Scope) -> list[Problem]:
    problems: list[Problem] = []
    params: dict[str, Type] = {}
    for p in ev.params:
        if p.name in params:
            problems.append(Problem(f"event {ev.name}: duplicate parameter {p.name}"))
        params[p.name] = p.type
    for g in ev.guards:
        problems += _predicate_problems(g.pred, scope, params, f"event {ev.name} guard {g.label}")
    for w in ev.witnesses:
        problems += _predicate_problems(w.pred, scope, params, f"event {ev.name} witness {w.label}")

    # parallel actions: at most one assignment per variable, except pointwise
    # updates at syntactically distinct indexes
    seen: dict[str, list] = {}
    for a in ev.actions:
        var = scope.variables.get(a.target)
        if var is None:
            problems.append(Problem(f"event {ev.name} action {a.label}: unknown variable {a.target!r}", a.rhs))
            continue
        for prior in seen.get(a.target, ()):
            if prior is None or a.index is None or prior == a.index:
                problems.append(Problem(f"event {ev.name}: conflicting assignments to {a.target}"))
        seen.setdefault(a.target, []).append(a.index)
        try:
            rhs_t = infer(a.rhs, scope, params)
            if a.index is None:
                if not compatible(rhs_t, var.type):
                    problems.append(Problem(f"event {ev.name} action {a.label}: type mismatch on {a.target}", a.rhs))
            else:
                if not is_set_of_pairs(var.type):
                    problems.append(Problem(f"event {ev.name} action {a.label}: {a.target} is not indexable", a.index))
                else:
                    dom_t, ran_t = var.type.args[0].args
                    if not compatible(infer(a.index, scope, params), dom_t):
                        problems.append(Problem(f"event {ev.name} action {a.label}: bad index type", a.index))
                    if not compatible(rhs_t, ran_t):
                        problems.append(Problem(f"event {ev.name} action {a.label}: bad value type", a.rhs))
        except TypeProblem as tp:
            problems.append(Problem(f"event {ev.name} action {a.label}: {tp}", tp.node))
    return problems


def machine_problems(project: Project, machine: Machine) -> list[Problem]:
    scope = project.scope(machine.name)
    problems: list[Problem] = []

    if machine.refines is not None:
        try:
            project.machine(machine.refines)
        except KeyError:
            problems.append(Problem(f"machine {machine.name} refines unknown {machine.refines!r}"))
    for s in machine.sees:
        try:
            project.context(s)
        except KeyError:
            problems.append(Problem(f"machine {machine.name} sees unknown context {s!r}"))

    # initialisation covers every own variable exactly once
    init_targets = [a.target for a in machine.init.actions]
    for v in machine.variables:
        n = init_targets.count(v.name)
        if n != 1:
            problems.append(Problem(f"machine {machine.name}: {v.name} initialised {n} times"))
    for t in init_targets:
        if machine.variable(t) is None and t not in scope.variables:
            problems.append(Problem(f"machine {machine.name}: initialisation of unknown {t!r}"))
    if machine.init.guards or machine.init.params:
        problems.append(Problem(f"machine {machine.name}: initialisation must be unguarded"))

    for inv in machine.invariants:
        problems += _predicate_problems(inv.pred, scope, {}, f"invariant {inv.label}")

    names = [e.name for e in machine.events]
    if len(names) != len(set(names)):
        problems.append(Problem(f"machine {machine.name}: duplicate event names"))

    problems += _event_problems(project, machine, machine.init, scope)
    for ev in machine.events:
        problems += _event_problems(project, machine, ev, scope)
    return problems


def project_problems(project: Project) -> list[Problem]:
    problems: list[Problem] = []
    if not project.root:
        problems.append(Problem("project has no root machine"))
    else:
        try:
            project.machine(project.root)
        except KeyError:
            problems.append(Problem(f"root machine {project.root!r} does not exist"))
    names = [m.name for m in project.machines] + [c.name for c in project.contexts]
    if len(names) != len(set(names)):
        problems.append(Problem("duplicate machine/context names"))
    atom_owner: dict[str, str] = {}
    for c in project.contexts:
        for s in c.sets:
            for a in s.atoms:
                if a in atom_owner and atom_owner[a] != s.name:
                    problems.append(Problem(f"atom {a} declared in both {atom_owner[a]} and {s.name}"))
                atom_owner[a] = s.name
    for m in project.machines:
        problems += machine_problems(project, m)
    return problems


def well_formed(project: Project) -> bool:
    return not project_problems(project)
