"""Recursive-descent parser producing kernel model objects.

Identifiers in expressions come out unresolved (empty `ref`); the linker
classifies them against the project scope and rewrites carrier atoms into
atom literals. Source positions are kept in a side table keyed by node
identity so the linker can report positioned diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..kernel.model import (Action, CarrierSet, Constant, Context, Event,
                            Guard, Invariant, Machine, Param, Variable,
                            Witness, INIT_NAME)
from ..kernel.terms import (Atom, BOOL, Expr, INT, Pair, Type, Value, boollit,
                            carrier, ex, ident, intlit, pair_type, set_of)
from .lexer import LexError, Token, lex


@dataclass(frozen=True, slots=True)
class Diagnostic:
    path: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}: {self.message}"


class SourceError(Exception):
    """Parse, link, or type failure with positions."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class ParsedFile:
    path: str
    contexts: list[Context]
    machines: list[Machine]
    spans: dict[int, tuple[int, int]]  # id(Expr) -> (line, col)


COMPARE_OPS = {"=": "eq", "/=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge",
               ":": "in", "/:": "notin"}
SET_OPS = {"\\/": "union", "\\": "setminus", "<+": "override"}


class _Parser:
    def __init__(self, toks: list[Token], path: str):
        self.toks = toks
        self.pos = 0
        self.path = path
        self.spans: dict[int, tuple[int, int]] = {}

    # ---- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def at_kw(self, word: str) -> bool:
        return self.at("kw", word)

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.peek()
        raise SourceError([Diagnostic(self.path, t.line, t.col, message)])

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            self.fail(f"expected {want!r}, found {self.peek().text or 'end of file'!r}")
        return self.next()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            self.fail(f"expected {word!r}, found {self.peek().text or 'end of file'!r}")
        return self.next()

    def name(self, what: str) -> str:
        if not self.at("name"):
            self.fail(f"expected {what}, found {self.peek().text or 'end of file'!r}")
        return self.next().text

    def mark(self, e: Expr, tok: Token) -> Expr:
        self.spans[id(e)] = (tok.line, tok.col)
        return e

    # ---- types

    def parse_decl_type(self) -> tuple[Type, bool]:
        """Type of a declaration; a top-level `+->` marks functionality."""
        left = self.parse_type()
        if self.at("+->"):
            self.next()
            right = self.parse_type()
            return set_of(pair_type(left, right)), True
        return left, False

    def parse_type(self) -> Type:
        t = self.parse_type_primary()
        while self.at("**"):
            self.next()
            t = pair_type(t, self.parse_type_primary())
        return t

    def parse_type_primary(self) -> Type:
        if self.at_kw("INT"):
            self.next()
            return INT
        if self.at_kw("BOOL"):
            self.next()
            return BOOL
        if self.at_kw("POW"):
            self.next()
            self.expect("(")
            inner = self.parse_type()
            self.expect(")")
            return set_of(inner)
        if self.at("("):
            self.next()
            inner = self.parse_type()
            self.expect(")")
            return inner
        return carrier(self.name("a type"))

    # ---- expressions (precedence climbing, loosest first)

    def parse_expr(self) -> Expr:
        return self.parse_implies()

    def parse_implies(self) -> Expr:
        left = self.parse_or()
        if self.at("=>"):
            self.next()
            return ex("implies", left, self.parse_implies())
        return left

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at_kw("or"):
            self.next()
            e = ex("or", e, self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_not()
        while self.at("&"):
            self.next()
            e = ex("and", e, self.parse_not())
        return e

    def parse_not(self) -> Expr:
        if self.at_kw("not"):
            self.next()
            return ex("not", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        left = self.parse_setexpr()
        for sym, tag in COMPARE_OPS.items():
            if self.at(sym):
                self.next()
                return ex(tag, left, self.parse_setexpr())
        return left

    def parse_setexpr(self) -> Expr:
        e = self.parse_maplet()
        while any(self.at(s) for s in SET_OPS):
            tag = SET_OPS[self.next().kind]
            e = ex(tag, e, self.parse_maplet())
        return e

    def parse_maplet(self) -> Expr:
        e = self.parse_arith()
        while self.at("|->"):
            self.next()
            e = ex("maplet", e, self.parse_arith())
        return e

    def parse_arith(self) -> Expr:
        e = self.parse_unary()
        while self.at("+") or self.at("-"):
            tag = "add" if self.next().kind == "+" else "sub"
            e = ex(tag, e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        if self.at("-"):
            tok = self.next()
            inner = self.parse_unary()
            if inner.kind == "int":
                return self.mark(intlit(-inner.value), tok)
            return self.mark(ex("sub", intlit(0), inner), tok)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while self.at("("):
            self.next()
            arg = self.parse_expr()
            self.expect(")")
            e = ex("apply", e, arg)
        return e

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if self.at("int"):
            self.next()
            return self.mark(intlit(int(tok.text)), tok)
        if self.at_kw("TRUE") or self.at_kw("FALSE"):
            self.next()
            return self.mark(boollit(tok.text == "TRUE"), tok)
        for fn, tag in (("dom", "dom"), ("card", "card"), ("SIGMA", "sum")):
            if self.at_kw(fn):
                self.next()
                self.expect("(")
                inner = self.parse_expr()
                self.expect(")")
                return self.mark(ex(tag, inner), tok)
        if self.at("name"):
            self.next()
            return self.mark(ident(tok.text), tok)
        if self.at("("):
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.at("{"):
            self.next()
            elems: list[Expr] = []
            if not self.at("}"):
                elems.append(self.parse_expr())
                while self.at(","):
                    self.next()
                    elems.append(self.parse_expr())
            self.expect("}")
            return self.mark(ex("setlit", *elems), tok)
        self.fail(f"expected an expression, found {tok.text or 'end of file'!r}")

    # ---- labelled clauses

    def parse_labeled(self) -> tuple[str, Expr]:
        label = self.name("a label")
        self.expect(":")
        return label, self.parse_expr()

    def at_labeled(self) -> bool:
        return self.at("name") and self.peek(1).kind == ":"

    def parse_action(self) -> Action:
        label = self.name("an action label")
        self.expect(":")
        target = self.name("a variable")
        index = None
        if self.at("("):
            self.next()
            index = self.parse_expr()
            self.expect(")")
        self.expect(":=")
        rhs = self.parse_expr()
        return Action(label, target, rhs, index)

    def at_action(self) -> bool:
        return self.at("name") and self.peek(1).kind == ":"

    # ---- units

    def parse_context(self) -> Context:
        self.expect_kw("context")
        name = self.name("a context name")
        sets: list[CarrierSet] = []
        constants: list[Constant] = []
        if self.at_kw("sets"):
            self.next()
            while self.at("name"):
                sname = self.next().text
                self.expect("=")
                self.expect("{")
                atoms = [self.name("an element")]
                while self.at(","):
                    self.next()
                    atoms.append(self.name("an element"))
                self.expect("}")
                sets.append(CarrierSet(sname, tuple(atoms)))
        if self.at_kw("constants"):
            self.next()
            while self.at("name"):
                cname = self.next().text
                self.expect(":")
                ctype, _ = self.parse_decl_type()
                self.expect("=")
                tok = self.peek()
                value = self.parse_ground_value()
                constants.append(Constant(cname, ctype, value))
                del tok
        self.expect_kw("end")
        return Context(name, tuple(sets), tuple(constants))

    def parse_ground_value(self) -> Value:
        """Constants are literal: numbers, atoms, maplets, and set displays."""
        tok = self.peek()
        e = self.parse_expr()

        def fold(n: Expr) -> Value:
            if n.kind == "int":
                return n.value
            if n.kind == "bool":
                return n.value
            if n.kind == "ident":  # resolved to an atom later; keep the name
                return Atom(n.value)
            if n.kind == "maplet":
                return Pair(fold(n.kids[0]), fold(n.kids[1]))
            if n.kind == "setlit":
                return frozenset(fold(k) for k in n.kids)
            self.fail("constant values must be literal", tok)

        return fold(e)

    def parse_machine(self) -> Machine:
        self.expect_kw("machine")
        name = self.name("a machine name")
        refines = None
        sees: list[str] = []
        if self.at_kw("refines"):
            self.next()
            refines = self.name("a machine name")
        if self.at_kw("sees"):
            self.next()
            sees.append(self.name("a context name"))
            while self.at(","):
                self.next()
                sees.append(self.name("a context name"))
        variables: list[Variable] = []
        if self.at_kw("variables"):
            self.next()
            while self.at("name"):
                vname = self.next().text
                self.expect(":")
                vtype, functional = self.parse_decl_type()
                variables.append(Variable(vname, vtype, functional))
        invariants: list[Invariant] = []
        if self.at_kw("invariants"):
            self.next()
            while self.at_labeled():
                label, pred = self.parse_labeled()
                invariants.append(Invariant(label, pred))
        init = Event(INIT_NAME)
        if self.at_kw("initialisation"):
            self.next()
            acts: list[Action] = []
            while self.at_action():
                acts.append(self.parse_action())
            init = Event(INIT_NAME, actions=tuple(acts))
        events: list[Event] = []
        while self.at_kw("event"):
            events.append(self.parse_event())
        self.expect_kw("end")
        return Machine(name, refines, tuple(sees), tuple(variables),
                       tuple(invariants), init, tuple(events))

    def parse_event(self) -> Event:
        self.expect_kw("event")
        name = self.name("an event name")
        params: list[Param] = []
        if self.at_kw("any"):
            self.next()
            while True:
                pname = self.name("a parameter")
                self.expect(":")
                ptype, _ = self.parse_decl_type()
                params.append(Param(pname, ptype))
                if not self.at(","):
                    break
                self.next()
        guards: list[Guard] = []
        if self.at_kw("when"):
            self.next()
            while self.at_labeled():
                label, pred = self.parse_labeled()
                guards.append(Guard(label, pred))
        witnesses: list[Witness] = []
        if self.at_kw("with"):
            self.next()
            while self.at_labeled():
                label, pred = self.parse_labeled()
                witnesses.append(Witness(label, pred))
        actions: list[Action] = []
        if self.at_kw("then"):
            self.next()
            while self.at_action():
                actions.append(self.parse_action())
        self.expect_kw("end")
        return Event(name, tuple(params), tuple(guards), tuple(actions), tuple(witnesses))

    def parse_file(self) -> ParsedFile:
        contexts: list[Context] = []
        machines: list[Machine] = []
        while not self.at("eof"):
            if self.at_kw("context"):
                contexts.append(self.parse_context())
            elif self.at_kw("machine"):
                machines.append(self.parse_machine())
            else:
                self.fail(f"expected 'machine' or 'context', found {self.peek().text!r}")
        return ParsedFile(self.path, contexts, machines, self.spans)


def parse_text(src: str, path: str = "<string>") -> ParsedFile:
    try:
        toks = lex(src)
    except LexError as le:
        raise SourceError([Diagnostic(path, le.line, le.col, str(le))]) from None
    return _Parser(toks, path).parse_file()
