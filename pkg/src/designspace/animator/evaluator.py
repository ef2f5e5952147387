"""Ground evaluation of expressions over explicit states.

An environment maps every name in scope (variables, constants, event
parameters) to a ground value; carrier atoms evaluate to themselves.
Evaluation is total except for the two partiality faults of function
application, which raise EvalFault. `and`/`or`/`implies` evaluate left
to right and skip the right operand once the left decides.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..kernel.terms import Atom, Expr, Pair, Value


@dataclass(frozen=True)
class EvalFault(Exception):
    kind: str       # "apply-outside-domain" | "apply-non-functional"
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def eval_expr(e: Expr, env: dict[str, Value]) -> Value:
    k = e.kind
    if k in ("int", "bool"):
        return e.value
    if k == "atom":
        return Atom(e.value)
    if k == "ident":
        try:
            return env[e.value]
        except KeyError:
            raise EvalFault("unbound-name", e.value) from None
    if k == "maplet":
        return Pair(eval_expr(e.kids[0], env), eval_expr(e.kids[1], env))
    if k == "setlit":
        return frozenset(eval_expr(kid, env) for kid in e.kids)
    if k == "union":
        return eval_expr(e.kids[0], env) | eval_expr(e.kids[1], env)
    if k == "setminus":
        return eval_expr(e.kids[0], env) - eval_expr(e.kids[1], env)
    if k == "override":
        f = eval_expr(e.kids[0], env)
        g = eval_expr(e.kids[1], env)
        newdom = {p.left for p in g}
        return frozenset(p for p in f if p.left not in newdom) | g
    if k == "in":
        return eval_expr(e.kids[0], env) in eval_expr(e.kids[1], env)
    if k == "notin":
        return eval_expr(e.kids[0], env) not in eval_expr(e.kids[1], env)
    if k == "apply":
        f = eval_expr(e.kids[0], env)
        x = eval_expr(e.kids[1], env)
        hits = [p.right for p in f if p.left == x]
        if not hits:
            raise EvalFault("apply-outside-domain", f"no pair at {x!r}")
        if len(hits) > 1:
            raise EvalFault("apply-non-functional", f"{len(hits)} pairs at {x!r}")
        return hits[0]
    if k == "dom":
        return frozenset(p.left for p in eval_expr(e.kids[0], env))
    if k == "card":
        return len(eval_expr(e.kids[0], env))
    if k == "sum":
        v = eval_expr(e.kids[0], env)
        total = 0
        for p in v:
            if not isinstance(p, Pair) or not isinstance(p.right, int):
                raise EvalFault("sum-over-non-function", repr(p))
            total += p.right
        return total
    if k == "add":
        return eval_expr(e.kids[0], env) + eval_expr(e.kids[1], env)
    if k == "sub":
        return eval_expr(e.kids[0], env) - eval_expr(e.kids[1], env)
    if k == "not":
        return not eval_expr(e.kids[0], env)
    if k == "and":
        return bool(eval_expr(e.kids[0], env)) and bool(eval_expr(e.kids[1], env))
    if k == "or":
        return bool(eval_expr(e.kids[0], env)) or bool(eval_expr(e.kids[1], env))
    if k == "implies":
        return (not eval_expr(e.kids[0], env)) or bool(eval_expr(e.kids[1], env))
    if k == "eq":
        return eval_expr(e.kids[0], env) == eval_expr(e.kids[1], env)
    if k == "ne":
        return eval_expr(e.kids[0], env) != eval_expr(e.kids[1], env)
    if k in ("lt", "le", "gt", "ge"):
        a = eval_expr(e.kids[0], env)
        b = eval_expr(e.kids[1], env)
        if not isinstance(a, int) or not isinstance(b, int):
            raise EvalFault("order-on-non-integers", f"{a!r} {k} {b!r}")
        return {"lt": a < b, "le": a <= b, "gt": a > b, "ge": a >= b}[k]
    raise EvalFault("unknown-operator", k)
