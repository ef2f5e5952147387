"""Breadth-first theory formation over a bundle of tables.

Each wave expands every table of the current depth through the enabled
production rules; tables touching a priority symbol are expanded before
the rest, so a tight table budget starves unrelated corners of the
search first. Every admitted table is compared extensionally against
all earlier concepts of the same arity, emitting conjectures on the
spot; a candidate whose rowset already exists is recorded as an iff and
not searched further.

Generation policy (what keeps the closure finite and the interesting
derivations cheap):
- exists drops the trailing column; size and sum group on the leading
  column, which by export convention is the state id;
- split only tests non-leading columns with at most 5 observed values;
- negate only complements tables of arity <= 2;
- arith combines the two trailing integer columns of arity >= 3 tables,
  so the grouping column always survives;
- compose joins two tables that share exactly their leading column,
  both of arity <= 2 and both within depth 1.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field

from .concepts import PR_NAMES, PRError, arith, compose, exists, negate
from .concepts import size as size_pr
from .concepts import split as split_pr
from .concepts import total
from .tables import DataTable, cell_key

SPLIT_CATEGORY_MAX = 5

_REL = {"implies": "=>", "iff": "<=>",
        "near-implies": "~>", "near-iff": "<~>"}


@dataclass(frozen=True)
class Conjecture:
    kind: str                                  # implies | iff | near-implies | near-iff
    lhs: DataTable
    rhs: DataTable
    alignment: tuple[tuple[str, str], ...]     # positional column pairing
    satisfying: int
    total: int
    support: float
    index: int                                 # discovery index, output order
    tags: frozenset = frozenset({"plain"})

    @property
    def definition(self) -> str:
        return f"{self.lhs.defn} {_REL[self.kind]} {self.rhs.defn}"

    def definition_size(self) -> int:
        return len(self.lhs.defn) + len(self.rhs.defn)

    def tagged(self, tags) -> "Conjecture":
        return dataclasses.replace(self, tags=frozenset(tags))

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lhs": self.lhs.defn,
            "rhs": self.rhs.defn,
            "support": {"satisfying": self.satisfying, "total": self.total,
                        "ratio": self.support},
            "tags": sorted(self.tags),
            "definition": self.definition,
        }


@dataclass
class FormerConfig:
    max_depth: int = 3
    theta: float = 0.4
    priority: frozenset = frozenset()          # symbols expanded first
    enabled: frozenset = PR_NAMES
    max_tables: int = 2500

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("depth budget must be >= 1")
        if not 0 < self.theta <= 1:
            raise ValueError("theta must be in (0, 1]")
        unknown = set(self.enabled) - PR_NAMES
        if unknown:
            raise ValueError(f"unknown production rules {sorted(unknown)}")


@dataclass
class Theory:
    concepts: list = field(default_factory=list)
    conjectures: list = field(default_factory=list)
    partial: bool = False

    def concept(self, defn: str) -> DataTable:
        for t in self.concepts:
            if t.defn == defn:
                return t
        raise KeyError(defn)

    def by_kind(self, kind: str) -> list:
        return [c for c in self.conjectures if c.kind == kind]


def _int_col(t: DataTable, col: str) -> bool:
    dom = t.domain(col)
    return bool(dom) and all(
        isinstance(v, int) and not isinstance(v, bool) for v in dom)


def _unary_candidates(t: DataTable, enabled) -> list[DataTable]:
    out = []
    if "exists" in enabled and t.arity >= 2:
        out.append(lambda: exists(t, t.columns[-1:]))
    if "size" in enabled and t.arity >= 2:
        out.append(lambda: size_pr(t, t.columns[:1]))
    if "split" in enabled and t.arity >= 2:
        for ci in range(1, t.arity):
            col = t.columns[ci]
            observed = t.column_values(col)
            if len(observed) > SPLIT_CATEGORY_MAX:
                continue
            for v in sorted(observed, key=cell_key):
                out.append(lambda col=col, v=v: split_pr(t, col, v))
    if "sum" in enabled and t.arity >= 2 and _int_col(t, t.columns[-1]):
        out.append(lambda: total(t, t.columns[-1], t.columns[:1]))
    if "arith" in enabled and t.arity >= 3 \
            and _int_col(t, t.columns[-2]) and _int_col(t, t.columns[-1]):
        out.append(lambda: arith(t, "+", t.columns[-2:]))
        out.append(lambda: arith(t, "-", t.columns[-2:]))
    if "negate" in enabled and t.arity <= 2:
        out.append(lambda: negate(t))
    results = []
    for mk in out:
        try:
            results.append(mk())
        except PRError:
            pass
    return results


def _composable(t: DataTable, u: DataTable) -> bool:
    if t.arity > 2 or u.arity > 2 or t.depth > 1 or u.depth > 1:
        return False
    if t.columns[0] != u.columns[0]:
        return False
    shared = set(t.columns) & set(u.columns)
    return shared == {t.columns[0]}


def form_theory(base, config: FormerConfig | None = None) -> Theory:
    cfg = config or FormerConfig()
    th = Theory()
    seen: dict[frozenset, DataTable] = {}
    counter = itertools.count()

    def emit(kind, lhs, rhs, satisfying, total_count, ratio):
        align = tuple(zip(lhs.columns, rhs.columns))
        th.conjectures.append(Conjecture(
            kind, lhs, rhs, align, satisfying, total_count, ratio,
            next(counter)))

    def check_against_existing(t: DataTable):
        for e in th.concepts:
            if e.arity != t.arity:
                continue
            inter = len(e.rows & t.rows)
            if inter == 0:
                continue
            r_et = inter / len(e)
            r_te = inter / len(t)
            if r_et == 1.0:
                emit("implies", e, t, inter, len(e), 1.0)
            elif r_et >= cfg.theta:
                emit("near-implies", e, t, inter, len(e), r_et)
            if r_te == 1.0:
                emit("implies", t, e, inter, len(t), 1.0)
            elif r_te >= cfg.theta:
                emit("near-implies", t, e, inter, len(t), r_te)
            union = len(e) + len(t) - inter
            jac = inter / union
            if cfg.theta <= jac < 1.0:
                emit("near-iff", e, t, inter, union, jac)

    def admit(t: DataTable) -> bool:
        """Record a candidate; False means the table budget ran out."""
        if t.arity == 0 or not t.rows:
            return True  # empty concepts are suppressed wholesale
        prior = seen.get(t.rows)
        if prior is not None:
            if prior.defn != t.defn:
                emit("iff", prior, t, len(t), len(t), 1.0)
            return True
        if len(th.concepts) >= cfg.max_tables:
            th.partial = True
            return False
        check_against_existing(t)
        th.concepts.append(t)
        seen[t.rows] = t
        return True

    for t in base:
        if not admit(t):
            return th

    for depth in range(cfg.max_depth):
        wave = [(i, t) for i, t in enumerate(th.concepts)
                if t.depth == depth]
        if not wave:
            break
        wave.sort(key=lambda it: (0 if it[1].symbols & cfg.priority else 1,
                                  it[0]))
        for disc, t in wave:
            for cand in _unary_candidates(t, cfg.enabled):
                if not admit(cand):
                    return th
            if "compose" in cfg.enabled:
                partners = [u for u in th.concepts[:disc]
                            if _composable(u, t)]
                for u in partners:
                    try:
                        cand = compose(u, t)
                    except PRError:
                        continue
                    if not admit(cand):
                        return th
    return th
