"""Deterministic rendering of projects back to source text.

Rendering preserves declaration order, so parse(render(x)) == x holds
node for node. Parenthesization is minimal for the operator precedence
the parser implements.
"""
from __future__ import annotations

from ..kernel.model import Context, Event, Machine, Project, Variable, INIT_NAME
from ..kernel.terms import Atom, Expr, Pair, Type, Value, value_key

_LEVEL = {
    "implies": 10,
    "or": 20,
    "and": 30,
    "not": 40,
    "eq": 50, "ne": 50, "lt": 50, "le": 50, "gt": 50, "ge": 50, "in": 50, "notin": 50,
    "union": 60, "setminus": 60, "override": 60,
    "maplet": 70,
    "add": 80, "sub": 80,
}

_BINOP = {
    "implies": "=>", "or": "or", "and": "&",
    "eq": "=", "ne": "/=", "lt": "<", "le": "<=", "gt": ">", "ge": ">=",
    "in": ":", "notin": "/:",
    "union": "\\/", "setminus": "\\", "override": "<+",
    "maplet": "|->", "add": "+", "sub": "-",
}

_PREFIX_FN = {"dom": "dom", "card": "card", "sum": "SIGMA"}


def render_expr(e: Expr, level: int = 0) -> str:
    k = e.kind
    if k == "int":
        text, mine = str(e.value), 100
    elif k == "bool":
        text, mine = ("TRUE" if e.value else "FALSE"), 100
    elif k in ("atom", "ident"):
        text, mine = e.value, 100
    elif k == "setlit":
        text = "{" + ", ".join(render_expr(kid) for kid in e.kids) + "}"
        mine = 100
    elif k in _PREFIX_FN:
        text, mine = f"{_PREFIX_FN[k]}({render_expr(e.kids[0])})", 100
    elif k == "apply":
        text, mine = f"{render_expr(e.kids[0], 100)}({render_expr(e.kids[1])})", 100
    elif k == "not":
        text, mine = f"not {render_expr(e.kids[0], 40)}", 40
    elif k == "implies":  # right associative
        mine = 10
        text = f"{render_expr(e.kids[0], 11)} => {render_expr(e.kids[1], 10)}"
    elif k in _LEVEL:  # left associative binary, comparisons non-associative
        mine = _LEVEL[k]
        right_floor = mine + 1
        left_floor = mine + 1 if mine == 50 else mine
        text = f"{render_expr(e.kids[0], left_floor)} {_BINOP[k]} {render_expr(e.kids[1], right_floor)}"
    else:
        raise AssertionError(k)
    return f"({text})" if mine < level else text


def render_type(t: Type, level: int = 0) -> str:
    if t.kind == "int":
        return "INT"
    if t.kind == "bool":
        return "BOOL"
    if t.kind == "carrier":
        return t.name
    if t.kind == "set":
        return f"POW({render_type(t.args[0])})"
    if t.kind == "pair":
        # ** is left associative
        left = render_type(t.args[0], 1)
        right = render_type(t.args[1], 2)
        text = f"{left} ** {right}"
        return f"({text})" if level >= 2 else text
    raise AssertionError(t.kind)


def render_decl_type(v: Variable) -> str:
    t = v.type
    if v.functional and t.kind == "set" and t.args[0].kind == "pair":
        dom_t, ran_t = t.args[0].args
        return f"{render_type(dom_t, 2)} +-> {render_type(ran_t, 2)}"
    return render_type(t)


def render_value(v: Value) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Atom):
        return v.name
    if isinstance(v, Pair):
        return f"{render_value(v.left)} |-> {render_value(v.right)}"
    if isinstance(v, frozenset):
        return "{" + ", ".join(render_value(x) for x in sorted(v, key=value_key)) + "}"
    raise TypeError(f"not a ground value: {v!r}")


def render_context(c: Context) -> str:
    lines = [f"context {c.name}"]
    if c.sets:
        lines.append("sets")
        for s in c.sets:
            lines.append(f"  {s.name} = {{{', '.join(s.atoms)}}}")
    if c.constants:
        lines.append("constants")
        for k in c.constants:
            lines.append(f"  {k.name} : {render_type(k.type)} = {render_value(k.value)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _render_event(e: Event) -> list[str]:
    lines = [f"event {e.name}"]
    if e.params:
        decls = ", ".join(f"{p.name} : {render_type(p.type)}" for p in e.params)
        lines.append(f"  any {decls}")
    if e.guards:
        lines.append("  when")
        for g in e.guards:
            lines.append(f"    {g.label}: {render_expr(g.pred)}")
    if e.witnesses:
        lines.append("  with")
        for w in e.witnesses:
            lines.append(f"    {w.label}: {render_expr(w.pred)}")
    if e.actions:
        lines.append("  then")
        for a in e.actions:
            target = a.target if a.index is None else f"{a.target}({render_expr(a.index)})"
            lines.append(f"    {a.label}: {target} := {render_expr(a.rhs)}")
    lines.append("end")
    return lines


def render_machine(m: Machine) -> str:
    head = f"machine {m.name}"
    if m.refines:
        head += f" refines {m.refines}"
    if m.sees:
        head += f" sees {', '.join(m.sees)}"
    lines = [head]
    if m.variables:
        lines.append("variables")
        for v in m.variables:
            lines.append(f"  {v.name} : {render_decl_type(v)}")
    if m.invariants:
        lines.append("invariants")
        for inv in m.invariants:
            lines.append(f"  {inv.label}: {render_expr(inv.pred)}")
    if m.init.actions:
        lines.append("initialisation")
        for a in m.init.actions:
            target = a.target if a.index is None else f"{a.target}({render_expr(a.index)})"
            lines.append(f"  {a.label}: {target} := {render_expr(a.rhs)}")
    for e in m.events:
        lines.extend(_render_event(e))
    lines.append("end")
    return "\n".join(lines) + "\n"


def render_project(p: Project) -> tuple[str, dict[str, str]]:
    """Render to (manifest text, {file name: content})."""
    files: dict[str, str] = {}
    names: list[str] = []
    for c in p.contexts:
        fname = f"{c.name}.ebm"
        files[fname] = render_context(c)
        names.append(fname)
    for m in p.machines:
        fname = f"{m.name}.ebm"
        files[fname] = render_machine(m)
        names.append(fname)
    listed = ", ".join(f'"{n}"' for n in names)
    manifest = f'root = "{p.root}"\nfiles = [{listed}]\n'
    return manifest, files
