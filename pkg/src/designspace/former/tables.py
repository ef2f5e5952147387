"""Finite data tables: the raw material for concept formation.

A table is a named relation over ground values. Each column carries a
finite domain so that complements and totalised aggregates are defined
without reference to anything outside the table itself. Tables compare
extensionally by rowset, letting callers spot reinventions of the same
concept under a different derivation.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..kernel.terms import value_key


def cell_key(v):
    """Total order over table cells: ground machine values plus the
    bare strings used for event names."""
    if isinstance(v, str):
        return (5, v)
    return value_key(v)


@dataclass(frozen=True)
class Derivation:
    """One production-rule application in a table's lineage."""
    rule: str                       # negate, exists, size, split, sum, arith, compose
    parents: tuple[str, ...]        # parent table definitions
    params: tuple = ()              # rule parametrization, ground values only


@dataclass(frozen=True)
class DataTable:
    defn: str                                # derivation label, e.g. "sum(bal)"
    columns: tuple[str, ...]
    rows: frozenset
    _domains: tuple[tuple[str, frozenset], ...]
    depth: int = 0
    symbols: frozenset = frozenset()         # source variable/constant names
    history: tuple[Derivation, ...] = ()     # empty only for background tables

    @property
    def arity(self) -> int:
        return len(self.columns)

    def __len__(self) -> int:
        return len(self.rows)

    def domain(self, col: str) -> frozenset:
        for name, dom in self._domains:
            if name == col:
                return dom
        raise KeyError(col)

    def domains(self) -> dict[str, frozenset]:
        return dict(self._domains)

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=lambda r: tuple(cell_key(v) for v in r))

    def column_values(self, col: str) -> frozenset:
        i = self.columns.index(col)
        return frozenset(r[i] for r in self.rows)

    def rowset_key(self) -> frozenset:
        """Extensional identity: column names are derivation artifacts."""
        return self.rows

    def definition_size(self) -> int:
        return len(self.defn)


def table(defn: str, columns, rows, domains: dict[str, frozenset],
          depth: int = 0, symbols=frozenset(),
          history: tuple = ()) -> DataTable:
    columns = tuple(columns)
    if set(domains) != set(columns):
        raise ValueError(f"domains {sorted(domains)} != columns {columns}")
    frozen = tuple((c, frozenset(domains[c])) for c in columns)
    return DataTable(defn, columns, frozenset(map(tuple, rows)), frozen,
                     depth, frozenset(symbols), tuple(history))
