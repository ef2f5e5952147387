"""Explicit-state runtime for a project's root machine.

The simulated state spans every variable visible through the refinement
chain (concrete declarations shadow abstract ones). Initialisation runs
abstract-first so a refinement may re-initialise what it shadows; events
come from the root machine alone, while invariants are collected along
the whole chain.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..kernel.model import Event, Invariant, Machine, Project, Variable
from ..kernel.terms import Atom, Expr, Pair, Type, Value, idents, value_key
from .evaluator import EvalFault, eval_expr
from .flaws import Flaw


@dataclass(frozen=True)
class IntRange:
    lo: int = 0
    hi: int = 3

    @staticmethod
    def parse(text: str) -> "IntRange":
        lo, _, hi = text.partition("..")
        return IntRange(int(lo), int(hi))

    def values(self) -> list[int]:
        return list(range(self.lo, self.hi + 1))


@dataclass
class FlatModel:
    project: Project
    chain: list[Machine]              # abstract first, root last
    variables: list[Variable]         # chain order, shadowed dropped
    invariants: list[tuple[str, Invariant]]  # (machine name, invariant)
    constants: dict[str, Value]
    atoms: dict[str, list[Atom]]      # carrier name -> atoms in declared order

    @property
    def root(self) -> Machine:
        return self.chain[-1]

    def events(self) -> tuple[Event, ...]:
        return self.root.events

    def event(self, name: str) -> Event | None:
        return self.root.event(name)

    def variable(self, name: str) -> Variable | None:
        for v in self.variables:
            if v.name == name:
                return v
        return None


def flatten(project: Project, root: str | None = None) -> FlatModel:
    chain = list(reversed(project.refinement_chain(root or project.root)))
    seen: dict[str, Variable] = {}
    order: list[str] = []
    for m in chain:
        for v in m.variables:
            if v.name not in seen:
                order.append(v.name)
            seen[v.name] = v  # concrete shadows abstract
    variables = [seen[n] for n in order]
    invariants = [(m.name, inv) for m in chain for inv in m.invariants]
    constants: dict[str, Value] = {}
    atoms: dict[str, list[Atom]] = {}
    for ctx in project.visible_contexts(chain[-1].name):
        for s in ctx.sets:
            atoms[s.name] = [Atom(a) for a in s.atoms]
        for k in ctx.constants:
            constants[k.name] = k.value
    return FlatModel(project, chain, variables, invariants, constants, atoms)


def state_key(state: dict[str, Value]) -> tuple:
    return tuple(sorted((k, value_key(v)) for k, v in state.items()))


def _apply_action(state: dict[str, Value], target: str,
                  index: Value | None, val: Value):
    if index is None:
        state[target] = val
    else:
        base = state.get(target, frozenset())
        state[target] = frozenset(
            p for p in base if p.left != index) | {_pair(index, val)}


def _pair(left: Value, right: Value):
    from ..kernel.terms import Pair
    return Pair(left, right)


def init_state(model: FlatModel) -> dict[str, Value]:
    """Run the chain's initialisations, abstract first."""
    state: dict[str, Value] = {}
    for m in model.chain:
        env = dict(model.constants)
        env.update(state)
        for a in m.init.actions:
            val = eval_expr(a.rhs, env)
            idx = eval_expr(a.index, env) if a.index is not None else None
            _apply_action(state, a.target, idx, val)
    return state


def param_domain(model: FlatModel, t: Type, int_range: IntRange) -> list[Value]:
    if t.kind == "carrier":
        return list(model.atoms.get(t.name, []))
    if t.kind == "int":
        return list(int_range.values())
    if t.kind == "bool":
        return [False, True]
    raise ValueError(f"cannot enumerate parameters of type kind {t.kind!r}")


@dataclass(frozen=True)
class EventInstance:
    event: str
    binding: tuple[tuple[str, Value], ...]  # in parameter order

    def env(self) -> dict[str, Value]:
        return dict(self.binding)

    def pretty(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.binding)
        return f"{self.event}({args})" if self.binding else self.event


def _guards_hold(model: FlatModel, ev: Event, env: dict,
                 flaws: set[Flaw], first: int = 0) -> bool:
    for g in ev.guards[first:]:
        try:
            if not eval_expr(g.pred, env):
                return False
        except EvalFault as f:
            flaws.add(Flaw("evaluation-fault", ev.name,
                           f"guard {g.label}: {f}"))
            return False
    return True


def _maplet_params(e: Expr) -> list[str] | None:
    # p1 |-> p2 |-> ... |-> pk, left-associated, every leaf a bare ident
    names: list[str] = []
    while e.kind == "maplet":
        if e.kids[1].kind != "ident":
            return None
        names.append(e.kids[1].value)
        e = e.kids[0]
    if e.kind != "ident":
        return None
    names.append(e.value)
    names.reverse()
    return names


def _first_guard_driver(ev: Event) -> tuple[tuple[str, ...], Expr] | None:
    """Detect a first guard of shape `p1 |-> ... |-> pk : S` where the p_i
    are exactly the event's parameters and S mentions none of them.

    Such a guard lets enabled() enumerate the elements of S instead of the
    whole parameter product; S is typically a handful of tuples while the
    product grows as |domain|^k. Only the first guard qualifies so that
    fault reporting from later guards is unchanged: the product path never
    evaluates them for a binding the first guard rejects."""
    if not ev.guards or not ev.params:
        return None
    pred = ev.guards[0].pred
    if pred.kind != "in":
        return None
    chain = _maplet_params(pred.kids[0])
    if chain is None:
        return None
    names = [p.name for p in ev.params]
    if sorted(chain) != sorted(names) or len(set(chain)) != len(chain):
        return None
    if any(name in names for name, _ in idents(pred.kids[1])):
        return None
    return tuple(chain), pred.kids[1]


def _chain_values(v: Value, n: int) -> list[Value] | None:
    out: list[Value] = []
    for _ in range(n - 1):
        if not isinstance(v, Pair):
            return None
        out.append(v.right)
        v = v.left
    out.append(v)
    out.reverse()
    return out


def _pool_combos(pool: frozenset, chain: tuple[str, ...], names: list[str],
                 domains: list[list[Value]]) -> list[tuple]:
    """Bindings drawn from the pool, restricted to the declared domains and
    ordered exactly as the product enumeration would have yielded them."""
    pos = {n: i for i, n in enumerate(names)}
    ranks = [{v: i for i, v in enumerate(d)} for d in domains]
    keyed = []
    for elem in pool:
        vals = _chain_values(elem, len(chain))
        if vals is None:
            continue
        combo: list = [None] * len(names)
        for cname, val in zip(chain, vals):
            combo[pos[cname]] = val
        key = []
        for i, val in enumerate(combo):
            r = ranks[i].get(val)
            if r is None:
                break
            key.append(r)
        else:
            keyed.append((tuple(key), tuple(combo)))
    keyed.sort()
    return [combo for _, combo in keyed]


def enabled(model: FlatModel, state: dict[str, Value],
            int_range: IntRange = IntRange()) -> tuple[list[EventInstance], set[Flaw]]:
    """Every enabled (event, binding), in deterministic order: events as
    declared, bindings lexicographic over the declared parameter domains."""
    found: list[EventInstance] = []
    flaws: set[Flaw] = set()
    base_env = dict(model.constants)
    base_env.update(state)
    for ev in model.events():
        domains = [param_domain(model, p.type, int_range) for p in ev.params]
        names = [p.name for p in ev.params]
        combos = None
        first = 0
        driver = _first_guard_driver(ev)
        if driver is not None:
            chain, set_expr = driver
            try:
                pool = eval_expr(set_expr, base_env)
            except EvalFault:
                pool = None
            if isinstance(pool, frozenset):
                combos = _pool_combos(pool, chain, names, domains)
                first = 1
        if combos is None:
            combos = itertools.product(*domains)
        for combo in combos:
            env = dict(base_env)
            env.update(zip(names, combo))
            if _guards_hold(model, ev, env, flaws, first):
                found.append(EventInstance(ev.name, tuple(zip(names, combo))))
    return found, flaws


def step(model: FlatModel, state: dict[str, Value],
         instance: EventInstance) -> tuple[dict[str, Value], set[Flaw]]:
    """Fire one instance: every right-hand side reads the pre-state."""
    ev = model.event(instance.event)
    if ev is None:
        raise KeyError(instance.event)
    flaws: set[Flaw] = set()
    env = dict(model.constants)
    env.update(state)
    env.update(instance.binding)
    staged: list[tuple[str, Value | None, Value]] = []
    for a in ev.actions:
        try:
            val = eval_expr(a.rhs, env)
            idx = eval_expr(a.index, env) if a.index is not None else None
        except EvalFault as f:
            flaws.add(Flaw("evaluation-fault", ev.name, f"action {a.label}: {f}"))
            return dict(state), flaws
        staged.append((a.target, idx, val))
    hit: set[tuple[str, tuple]] = set()
    for target, idx, _ in staged:
        key = (target, value_key(idx)) if idx is not None else (target, ())
        if key in hit:
            flaws.add(Flaw("evaluation-fault", ev.name,
                           f"parallel writes collide on {target}"))
            return dict(state), flaws
        hit.add(key)
    post = dict(state)
    for target, idx, val in staged:
        _apply_action(post, target, idx, val)
    return post, flaws


def check_invariants(model: FlatModel,
                     state: dict[str, Value]) -> tuple[list[str], set[Flaw]]:
    """Labels of violated invariants, plus any evaluation flaws."""
    env = dict(model.constants)
    env.update(state)
    violated: list[str] = []
    flaws: set[Flaw] = set()
    for mname, inv in model.invariants:
        try:
            if not eval_expr(inv.pred, env):
                violated.append(inv.label)
        except EvalFault as f:
            flaws.add(Flaw("evaluation-fault", inv.label,
                           f"invariant in {mname}: {f}"))
    return violated, flaws
