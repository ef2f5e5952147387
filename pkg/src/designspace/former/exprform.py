"""Lift table derivations back into machine expressions.

Only the value-shaped fragment is liftable: a bare variable/constant
name, a totalised sum over one, and sums or differences of two such
quantities built by arith over a compose. Everything else (negations,
splits, counts) has no direct reading as a machine predicate and maps
to None, which conveniently filters candidate invariants down to the
renderable ones.
"""
from __future__ import annotations

from ..kernel.terms import Expr, ex, ident
from ..surface.printer import render_expr


def _split_args(body: str) -> list[str] | None:
    args, depth, cur = [], 0, []
    for ch in body:
        if ch == "(" :
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return None
        if ch == "," and depth == 0:
            args.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        return None
    args.append("".join(cur).strip())
    return args


def defn_expr(defn: str) -> Expr | None:
    defn = defn.strip()
    if defn.replace(".", "").replace("_", "").isalnum() and defn[:1].isalpha():
        return ident(defn)
    if defn.startswith("sum(") and defn.endswith(")"):
        inner = defn_expr(defn[len("sum("):-1])
        return ex("sum", inner) if inner is not None else None
    for head, op in (("arith+(", "add"), ("arith-(", "sub")):
        if defn.startswith(head) and defn.endswith(")"):
            body = defn[len(head):-1]
            if not (body.startswith("compose(") and body.endswith(")")):
                return None
            parts = _split_args(body[len("compose("):-1])
            if parts is None or len(parts) != 2:
                return None
            kids = [defn_expr(p) for p in parts]
            if any(k is None for k in kids):
                return None
            return ex(op, *kids)
    return None


def conjecture_predicate(conj) -> str | None:
    """Render an iff conjecture as an equality predicate, or None."""
    if conj.kind != "iff":
        return None
    left = defn_expr(conj.lhs.defn)
    right = defn_expr(conj.rhs.defn)
    if left is None or right is None:
        return None
    # keep the composite quantity on the left, I2-style
    if left.kind == "ident" and right.kind != "ident":
        left, right = right, left
    return render_expr(ex("eq", left, right))
