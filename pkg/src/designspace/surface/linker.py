"""Links parsed files into a checked project.

Resolution classifies every identifier occurrence (parameter, variable,
constant, or carrier atom) and the checker then types the whole project.
All failures are reported as positioned diagnostics in one batch.
"""
from __future__ import annotations

import os
from dataclasses import replace

import tomli

from ..kernel import check
from ..kernel.model import (Action, Constant, Context, Event, Machine,
                            Project, Scope)
from ..kernel.terms import Atom, Expr, Value, atomlit
from .parser import Diagnostic, ParsedFile, SourceError, parse_text

MANIFEST_NAME = "project.toml"


def _resolve_expr(e: Expr, params: set[str], scope: Scope,
                  spans: dict[int, tuple[int, int]], out_spans: dict[int, tuple[int, int]],
                  diags: list[Diagnostic], path: str) -> Expr:
    span = spans.get(id(e), (0, 0))
    if e.kind == "ident":
        name = e.value
        if name in params:
            new = Expr("ident", value=name, ref="parameter")
        elif name in scope.variables:
            new = Expr("ident", value=name, ref="variable")
        elif name in scope.constants:
            new = Expr("ident", value=name, ref="constant")
        elif name in scope.atoms:
            new = atomlit(name)
        else:
            diags.append(Diagnostic(path, span[0], span[1], f"unresolved reference {name!r}"))
            new = e
        out_spans[id(new)] = span
        return new
    if not e.kids:
        out_spans[id(e)] = span
        return e
    kids = tuple(_resolve_expr(k, params, scope, spans, out_spans, diags, path) for k in e.kids)
    new = Expr(e.kind, kids=kids, value=e.value, ref=e.ref) if kids != e.kids else e
    out_spans[id(new)] = span
    return new


def _resolve_event(ev: Event, scope: Scope, spans, out_spans, diags, path) -> Event:
    params = {p.name for p in ev.params}

    def rx(e: Expr) -> Expr:
        return _resolve_expr(e, params, scope, spans, out_spans, diags, path)

    guards = tuple(replace(g, pred=rx(g.pred)) for g in ev.guards)
    witnesses = tuple(replace(w, pred=rx(w.pred)) for w in ev.witnesses)
    actions = tuple(
        Action(a.label, a.target, rx(a.rhs), rx(a.index) if a.index is not None else None)
        for a in ev.actions
    )
    return replace(ev, guards=guards, actions=actions, witnesses=witnesses)


def _check_constants(ctx: Context, atoms: dict[str, str], diags: list[Diagnostic], path: str):
    def atoms_ok(v: Value) -> bool:
        if isinstance(v, Atom):
            return v.name in atoms
        if hasattr(v, "left"):
            return atoms_ok(v.left) and atoms_ok(v.right)
        if isinstance(v, frozenset):
            return all(atoms_ok(x) for x in v)
        return True

    for c in ctx.constants:
        if not atoms_ok(c.value):
            diags.append(Diagnostic(path, 0, 0, f"constant {c.name} uses undeclared atoms"))


def link(files: list[ParsedFile], root: str) -> Project:
    diags: list[Diagnostic] = []
    contexts: list[Context] = []
    machines: list[Machine] = []
    owner: dict[str, str] = {}

    for f in files:
        for c in f.contexts:
            if c.name in owner:
                diags.append(Diagnostic(f.path, 0, 0, f"duplicate unit name {c.name!r}"))
            owner[c.name] = f.path
            contexts.append(c)
        for m in f.machines:
            if m.name in owner:
                diags.append(Diagnostic(f.path, 0, 0, f"duplicate unit name {m.name!r}"))
            owner[m.name] = f.path
            machines.append(m)
    if diags:
        raise SourceError(diags)

    draft = Project(tuple(contexts), tuple(machines), root)
    known = {m.name for m in machines}
    for m in machines:
        if m.refines is not None and m.refines not in known:
            path = owner.get(m.name, "<project>")
            diags.append(Diagnostic(path, 0, 0, f"machine {m.name} refines unknown {m.refines!r}"))
    for m in machines:
        for s in m.sees:
            if not any(c.name == s for c in contexts):
                path = owner.get(m.name, "<project>")
                diags.append(Diagnostic(path, 0, 0, f"machine {m.name} sees unknown context {s!r}"))
    if diags:
        raise SourceError(diags)

    spans_by_path = {f.path: f.spans for f in files}
    out_spans: dict[int, tuple[int, int]] = {}
    resolved: list[Machine] = []
    for m in machines:
        path = owner[m.name]
        scope = draft.scope(m.name)
        spans = spans_by_path[path]
        init = _resolve_event(m.init, scope, spans, out_spans, diags, path)
        events = tuple(_resolve_event(e, scope, spans, out_spans, diags, path) for e in m.events)
        invariants = tuple(
            replace(inv, pred=_resolve_expr(inv.pred, set(), scope, spans, out_spans, diags, path))
            for inv in m.invariants
        )
        resolved.append(replace(m, init=init, events=events, invariants=invariants))

    all_atoms = {a: s.name for cc in contexts for s in cc.sets for a in s.atoms}
    for c in contexts:
        _check_constants(c, all_atoms, diags, owner[c.name])
    if diags:
        raise SourceError(diags)

    project = Project(tuple(contexts), tuple(resolved), root)
    if not project.root or not any(m.name == project.root for m in resolved):
        diags.append(Diagnostic("<project>", 0, 0, f"root machine {root!r} does not exist"))
    for m in resolved:
        path = owner[m.name]
        for problem in check.machine_problems(project, m):
            line, col = out_spans.get(id(problem.node), (0, 0)) if problem.node is not None else (0, 0)
            diags.append(Diagnostic(path, line, col, problem.message))
    if diags:
        raise SourceError(diags)
    return project


def parse_sources(sources: dict[str, str], root: str) -> Project:
    """Parse in-memory sources: file name -> text."""
    files = [parse_text(text, path) for path, text in sources.items()]
    return link(files, root)


def load_manifest(path: str) -> tuple[str, list[str]]:
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    if "root" not in data or "files" not in data:
        raise SourceError([Diagnostic(path, 0, 0, "manifest needs 'root' and 'files' keys")])
    return data["root"], list(data["files"])


def parse_project(manifest_path: str) -> Project:
    """Parse a project from its manifest on disk."""
    root, file_names = load_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    files = []
    for name in file_names:
        full = os.path.join(base, name)
        if not os.path.exists(full):
            raise SourceError([Diagnostic(manifest_path, 0, 0, f"listed file {name!r} not found")])
        with open(full, "r", encoding="utf-8") as fh:
            files.append(parse_text(fh.read(), name))
    return link(files, root)
