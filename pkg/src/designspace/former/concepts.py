"""Production rules: each builds a new table from one or two parents.

Every rule is fully parametrized so callers can request any legal
application; the theory-formation search enumerates only a disciplined
subset of parametrizations (see theory.py). Conventions:

- complements stay inside the declared column domains;
- aggregates (sum) are totalised over the grouping domain, writing
  explicit zero rows; counting (size) is observational and is not;
- value columns created by a rule are named after the producing
  derivation, so joins never conflate two different aggregates;
- arithmetic replaces its two operand columns with the result.
"""
from __future__ import annotations

import itertools

from ..kernel.terms import Atom
from .tables import DataTable, Derivation, cell_key, table

MAX_CELLS = 50_000  # per-table size guard


class PRError(ValueError):
    """Invalid production-rule parametrization."""


def value_label(v) -> str:
    if isinstance(v, Atom):
        return v.name
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    return str(v)


def _int_dom(t: DataTable, col: str) -> bool:
    dom = t.domain(col)
    return bool(dom) and all(
        isinstance(v, int) and not isinstance(v, bool) for v in dom)


def _require_cols(t: DataTable, cols) -> None:
    missing = [c for c in cols if c not in t.columns]
    if missing:
        raise PRError(f"{t.defn}: no column(s) {missing}")


def negate(t: DataTable) -> DataTable:
    size = 1
    for c in t.columns:
        size *= len(t.domain(c))
        if size > MAX_CELLS:
            raise PRError(f"negate({t.defn}): domain product too large")
    full = set(itertools.product(*(
        sorted(t.domain(c), key=cell_key) for c in t.columns)))
    rows = full - set(t.rows)
    return table(f"negate({t.defn})", t.columns, rows, t.domains(),
                 t.depth + 1, t.symbols,
                 t.history + (Derivation("negate", (t.defn,)),))


def exists(t: DataTable, dropped: tuple[str, ...]) -> DataTable:
    _require_cols(t, dropped)
    if not dropped or len(dropped) >= t.arity:
        raise PRError(f"exists({t.defn}): must keep at least one column")
    keep = [i for i, c in enumerate(t.columns) if c not in dropped]
    cols = tuple(t.columns[i] for i in keep)
    rows = {tuple(r[i] for i in keep) for r in t.rows}
    doms = {c: t.domain(c) for c in cols}
    defn = (f"exists({t.defn})" if dropped == t.columns[-1:]
            else f"exists<{','.join(dropped)}>({t.defn})")
    return table(defn, cols, rows, doms, t.depth + 1, t.symbols,
                 t.history + (Derivation("exists", (t.defn,), tuple(dropped)),))


def size(t: DataTable, group: tuple[str, ...]) -> DataTable:
    """Count rows per group; groups that never occur get no row."""
    _require_cols(t, group)
    if not group or len(group) >= t.arity:
        raise PRError(f"size({t.defn}): group must be a proper subset")
    gi = [t.columns.index(c) for c in group]
    counts: dict[tuple, int] = {}
    for r in t.rows:
        key = tuple(r[i] for i in gi)
        counts[key] = counts.get(key, 0) + 1
    defn = (f"size({t.defn})" if group == t.columns[:1]
            else f"size<{','.join(group)}>({t.defn})")
    cols = tuple(group) + (defn,)
    doms = {c: t.domain(c) for c in group}
    doms[defn] = frozenset(counts.values()) | {0}
    rows = {g + (n,) for g, n in counts.items()}
    return table(defn, cols, rows, doms, t.depth + 1, t.symbols,
                 t.history + (Derivation("size", (t.defn,), tuple(group)),))


def split(t: DataTable, column: str, value) -> DataTable:
    """Select rows where the column equals the value, then drop it."""
    _require_cols(t, [column])
    if t.arity < 2:
        raise PRError(f"split({t.defn}): would leave no columns")
    ci = t.columns.index(column)
    rows = {r[:ci] + r[ci + 1:] for r in t.rows if r[ci] == value}
    cols = t.columns[:ci] + t.columns[ci + 1:]
    doms = {c: t.domain(c) for c in cols}
    defn = f"split<{column}={value_label(value)}>({t.defn})"
    return table(defn, cols, rows, doms, t.depth + 1, t.symbols,
                 t.history + (Derivation("split", (t.defn,), (column, value)),))


def total(t: DataTable, value_col: str, group: tuple[str, ...]) -> DataTable:
    """Sum a column per group, totalised: every value of the grouping
    domain gets a row, absent groups summing to 0."""
    _require_cols(t, (value_col, *group))
    if value_col in group:
        raise PRError(f"sum({t.defn}): value column inside group")
    if not _int_dom(t, value_col):
        raise PRError(f"sum({t.defn}): {value_col} is not integer-sorted")
    gi = [t.columns.index(c) for c in group]
    vi = t.columns.index(value_col)
    group_space = itertools.product(*(sorted(t.domain(c), key=cell_key)
                                      for c in group))
    sums: dict[tuple, int] = {g: 0 for g in group_space}
    if len(sums) > MAX_CELLS:
        raise PRError(f"sum({t.defn}): grouping domain too large")
    for r in t.rows:
        key = tuple(r[i] for i in gi)
        sums[key] = sums.get(key, 0) + r[vi]
    defn = (f"sum({t.defn})"
            if group == t.columns[:1] and value_col == t.columns[-1]
            else f"sum<{value_col};{','.join(group)}>({t.defn})")
    cols = tuple(group) + (defn,)
    doms = {c: t.domain(c) for c in group}
    doms[defn] = frozenset(sums.values())
    rows = {g + (s,) for g, s in sums.items()}
    return table(defn, cols, rows, doms, t.depth + 1, t.symbols,
                 t.history + (Derivation("sum", (t.defn,),
                                         (value_col, *group)),))


def arith(t: DataTable, op: str, cols: tuple[str, str]) -> DataTable:
    """Replace two integer columns with their sum or difference."""
    if op not in ("+", "-"):
        raise PRError(f"arith: unknown operator {op!r}")
    _require_cols(t, cols)
    a, b = cols
    if a == b:
        raise PRError(f"arith({t.defn}): operand columns must differ")
    if not (_int_dom(t, a) and _int_dom(t, b)):
        raise PRError(f"arith({t.defn}): operands must be integer-sorted")
    ai, bi = t.columns.index(a), t.columns.index(b)
    fn = (lambda x, y: x + y) if op == "+" else (lambda x, y: x - y)
    defn = (f"arith{op}({t.defn})" if cols == t.columns[-2:]
            else f"arith{op}<{a},{b}>({t.defn})")
    keep = [i for i in range(t.arity) if i not in (ai, bi)]
    out_cols = tuple(t.columns[i] for i in keep) + (defn,)
    rows = {tuple(r[i] for i in keep) + (fn(r[ai], r[bi]),) for r in t.rows}
    doms = {t.columns[i]: t.domain(t.columns[i]) for i in keep}
    doms[defn] = frozenset(r[-1] for r in rows)
    return table(defn, out_cols, rows, doms, t.depth + 1, t.symbols,
                 t.history + (Derivation("arith", (t.defn,), (op, a, b)),))


def compose(t: DataTable, u: DataTable) -> DataTable:
    """Natural join on all shared column names."""
    shared = [c for c in t.columns if c in u.columns]
    if not shared:
        raise PRError(f"compose({t.defn}, {u.defn}): no shared columns")
    for c in shared:
        if t.domain(c) != u.domain(c):
            raise PRError(f"compose: sort mismatch on column {c}")
    t_rest = [c for c in t.columns if c not in shared]
    u_rest = [c for c in u.columns if c not in shared]
    if set(t_rest) & set(u_rest):
        raise PRError(f"compose({t.defn}, {u.defn}): column name clash")
    ti = [t.columns.index(c) for c in shared]
    ui = [u.columns.index(c) for c in shared]
    tri = [t.columns.index(c) for c in t_rest]
    uri = [u.columns.index(c) for c in u_rest]
    index: dict[tuple, list] = {}
    for r in u.rows:
        index.setdefault(tuple(r[i] for i in ui), []).append(r)
    rows = set()
    for r in t.rows:
        key = tuple(r[i] for i in ti)
        for ur in index.get(key, ()):
            rows.add(tuple(r[i] for i in ti) +
                     tuple(r[i] for i in tri) +
                     tuple(ur[i] for i in uri))
            if len(rows) > MAX_CELLS:
                raise PRError(f"compose({t.defn}, {u.defn}): join too large")
    cols = tuple(shared) + tuple(t_rest) + tuple(u_rest)
    doms = {c: t.domain(c) for c in shared + t_rest}
    doms.update({c: u.domain(c) for c in u_rest})
    defn = f"compose({t.defn}, {u.defn})"
    return table(defn, cols, rows, doms,
                 max(t.depth, u.depth) + 1, t.symbols | u.symbols,
                 t.history + u.history +
                 (Derivation("compose", (t.defn, u.defn), tuple(shared)),))


PR_NAMES = frozenset({"negate", "exists", "size", "split",
                      "compose", "sum", "arith"})


def apply_pr(parents, kind: str, **params) -> DataTable:
    """Uniform entry point: kind name plus keyword parametrization."""
    if kind not in PR_NAMES:
        raise PRError(f"unknown production rule {kind!r}")
    if kind == "compose":
        t, u = parents
        return compose(t, u)
    (t,) = parents if isinstance(parents, (list, tuple)) else (parents,)
    if kind == "negate":
        return negate(t)
    if kind == "exists":
        return exists(t, tuple(params["dropped"]))
    if kind == "size":
        return size(t, tuple(params["group"]))
    if kind == "split":
        return split(t, params["column"], params["value"])
    if kind == "sum":
        return total(t, params["value_col"], tuple(params["group"]))
    return arith(t, params["op"], tuple(params["cols"]))
