"""Core term language: types, ground values, and expressions.

Everything here is immutable and hashable so terms can live inside sets,
dict keys, and canonical encodings without defensive copying.
"""
from __future__ import annotations

from dataclasses import dataclass, field


# --------------------------------------------------------------------------- types

@dataclass(frozen=True, slots=True)
class Type:
    """A type term: int, bool, a named carrier, a pair, or set-of.

    Partial functions are set-of-pair types; functionality is a flag on the
    declaration that owns the value, not part of the type term itself.
    """

    kind: str  # "int" | "bool" | "carrier" | "pair" | "set" | "any"
    name: str = ""
    args: tuple["Type", ...] = ()

    def __repr__(self) -> str:
        if self.kind == "carrier":
            return self.name
        if self.kind == "pair":
            return f"({self.args[0]!r} ** {self.args[1]!r})"
        if self.kind == "set":
            return f"POW({self.args[0]!r})"
        return self.kind.upper()


INT = Type("int")
BOOL = Type("bool")
ANY = Type("any")


def carrier(name: str) -> Type:
    return Type("carrier", name)


def pair_type(left: Type, right: Type) -> Type:
    return Type("pair", args=(left, right))


def set_of(elem: Type) -> Type:
    return Type("set", args=(elem,))


def is_set_of_pairs(t: Type) -> bool:
    return t.kind == "set" and t.args[0].kind == "pair"


def compatible(a: Type, b: Type) -> bool:
    """Structural compatibility, with "any" acting as a wildcard."""
    if a.kind == "any" or b.kind == "any":
        return True
    if a.kind != b.kind or a.name != b.name or len(a.args) != len(b.args):
        return False
    return all(compatible(x, y) for x, y in zip(a.args, b.args))


def merge_types(a: Type, b: Type) -> Type:
    """Prefer the more concrete of two compatible types."""
    if a.kind == "any":
        return b
    if b.kind == "any":
        return a
    if a.args:
        return Type(a.kind, a.name, tuple(merge_types(x, y) for x, y in zip(a.args, b.args)))
    return a


# --------------------------------------------------------------------------- values

@dataclass(frozen=True, slots=True)
class Atom:
    """An element of a finite carrier set."""

    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Pair:
    left: "Value"
    right: "Value"

    def __repr__(self) -> str:
        return f"({self.left!r} |-> {self.right!r})"


Value = object  # int | bool | Atom | Pair | frozenset


def value_key(v: Value):
    """Total order key over heterogeneous ground values (for determinism)."""
    if isinstance(v, bool):
        return (0, v)
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, Atom):
        return (2, v.name)
    if isinstance(v, Pair):
        return (3, value_key(v.left), value_key(v.right))
    if isinstance(v, frozenset):
        return (4, tuple(sorted(value_key(x) for x in v)))
    raise TypeError(f"not a ground value: {v!r}")


def flatten_value(v: Value) -> list[Value]:
    """Left-nested pair components, e.g. ((a,b),c) -> [a, b, c]."""
    if isinstance(v, Pair):
        return flatten_value(v.left) + [v.right]
    return [v]


def flatten_type(t: Type) -> list[Type]:
    if t.kind == "pair":
        return flatten_type(t.args[0]) + [t.args[1]]
    return [t]


# --------------------------------------------------------------------------- expressions

# Expression node tags. Binary/unary structure is positional in `kids`;
# literals and identifiers carry their payload in `value`.
NODE_TAGS = frozenset({
    "int", "bool", "atom", "ident",
    "maplet", "setlit", "union", "setminus", "in", "notin",
    "apply", "dom", "override", "card", "sum",
    "add", "sub",
    "not", "and", "or", "implies",
    "eq", "ne", "lt", "le", "gt", "ge",
})

COMPARISONS = frozenset({"eq", "ne", "lt", "le", "gt", "ge", "in", "notin"})

# comparison / membership complements used when a guard is negated
_COMPLEMENT = {
    "eq": "ne", "ne": "eq",
    "lt": "ge", "ge": "lt",
    "le": "gt", "gt": "le",
    "in": "notin", "notin": "in",
}


@dataclass(frozen=True)
class Expr:
    kind: str
    kids: tuple["Expr", ...] = ()
    value: object = None
    ref: str = ""  # for kind == "ident": "variable" | "constant" | "parameter" | ""

    def __post_init__(self):
        if self.kind not in NODE_TAGS:
            raise ValueError(f"unknown expression tag: {self.kind}")

    def __repr__(self) -> str:
        if self.kind in ("int", "bool", "atom"):
            return f"<{self.value}>"
        if self.kind == "ident":
            return f"<{self.value}:{self.ref or '?'}>"
        return f"({self.kind} {' '.join(map(repr, self.kids))})"


def intlit(n: int) -> Expr:
    return Expr("int", value=n)


def boollit(b: bool) -> Expr:
    return Expr("bool", value=b)


def atomlit(name: str) -> Expr:
    return Expr("atom", value=name)


def ident(name: str, ref: str = "") -> Expr:
    return Expr("ident", value=name, ref=ref)


def ex(kind: str, *kids: Expr) -> Expr:
    return Expr(kind, kids=tuple(kids))


def walk(e: Expr):
    yield e
    for k in e.kids:
        yield from walk(k)


def idents(e: Expr) -> set[tuple[str, str]]:
    return {(n.value, n.ref) for n in walk(e) if n.kind == "ident"}


def variable_refs(e: Expr) -> set[str]:
    return {n.value for n in walk(e) if n.kind == "ident" and n.ref == "variable"}


def refs_name(e: Expr, name: str) -> bool:
    return any(n.kind == "ident" and n.value == name for n in walk(e))


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    """Replace every identifier occurrence of `name` by `replacement`."""
    if e.kind == "ident" and e.value == name:
        return replacement
    if not e.kids:
        return e
    kids = tuple(substitute(k, name, replacement) for k in e.kids)
    if kids == e.kids:
        return e
    return Expr(e.kind, kids=kids, value=e.value, ref=e.ref)


def rename_ident(e: Expr, old: str, new: str) -> Expr:
    if e.kind == "ident" and e.value == old:
        return Expr("ident", value=new, ref=e.ref)
    if not e.kids:
        return e
    kids = tuple(rename_ident(k, old, new) for k in e.kids)
    if kids == e.kids:
        return e
    return Expr(e.kind, kids=kids, value=e.value, ref=e.ref)


def negate(e: Expr) -> Expr:
    """Logical complement, folding comparisons into their duals."""
    if e.kind in _COMPLEMENT:
        return Expr(_COMPLEMENT[e.kind], kids=e.kids)
    if e.kind == "not":
        return e.kids[0]
    if e.kind == "bool":
        return boollit(not e.value)
    return ex("not", e)
