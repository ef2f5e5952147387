"""Action reversal table.

An action is reversible when its update has a syntactic inverse:

    v := v \\/ S   <->   v := v \\ S
    v := v + k    <->   v := v - k      (plain or pointwise lvalue)

The variable must be the left operand and, for arithmetic, k must not
mention it, otherwise the inverse would not restore the old value.
Arithmetic reversal is a configuration switch; set operations always
count as reversible.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from ..kernel.model import Action
from ..kernel.terms import Expr, ex, ident, refs_name


@dataclass(frozen=True)
class ReversalConfig:
    arith: bool = True


DEFAULT_REVERSAL = ReversalConfig()
SET_OPS_ONLY = ReversalConfig(arith=False)

_SET_INVERSE = {"union": "setminus", "setminus": "union"}
_ARITH_INVERSE = {"add": "sub", "sub": "add"}


def _lvalue(a: Action) -> Expr:
    var = ident(a.target, "variable")
    if a.index is None:
        return var
    return ex("apply", var, a.index)


def reverse_action(a: Action, config: ReversalConfig = DEFAULT_REVERSAL) -> Action | None:
    """The inverse action, or None when `a` is not reversible."""
    rhs = a.rhs
    if not rhs.kids:
        return None
    lv = _lvalue(a)
    if rhs.kind in _SET_INVERSE and rhs.kids[0] == lv:
        return replace(a, rhs=ex(_SET_INVERSE[rhs.kind], lv, rhs.kids[1]))
    if config.arith and rhs.kind in _ARITH_INVERSE and rhs.kids[0] == lv:
        k = rhs.kids[1]
        if not refs_name(k, a.target):
            return replace(a, rhs=ex(_ARITH_INVERSE[rhs.kind], lv, k))
    return None
