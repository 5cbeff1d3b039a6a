"""Recursive-descent parser for the formula text syntax.

Grammar (loosest binding first)::

    formula := implies ('<->' implies)*
    implies := or ('->' implies)?
    or      := and ('|' and)*
    and     := unary ('&' unary)*
    unary   := '~' unary | QUANT var+ '.' formula | '(' formula ')' | atom
    atom    := true | false | OrphanEmpty | E(t,t) | Orphan(t) | color(t)
             | t = t | t != t | t in SET
             | Zero[cell] | Atomic[cell] | Orphan[cell] | E[cell; cell] | Color[name; cell]
    term    := f(term) | var
    cell    := [~]SET (',' [~]SET)*   (possibly empty)

Quantifier bodies extend as far to the right as possible.
"""

from __future__ import annotations

import re

from . import ast as A

_TOKEN = re.compile(r"\s*(?:(<->|->|!=|[~&|().,=\[\];])|([A-Za-z_][A-Za-z0-9_']*))")

ELEM_QUANT = {"forall": A.Forall, "exists": A.Exists}
SET_QUANT = {"Forall": A.Forall, "Exists": A.Exists}
RESERVED = {"f", "in", "true", "false", "E", "Orphan", "OrphanEmpty", "Zero", "Atomic", "Color",
            *ELEM_QUANT, *SET_QUANT}


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        where = "" if pos is None else f" at position {pos}"
        super().__init__(message + where)


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tok = m.group(1) or m.group(2)
        out.append((tok, m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # -- helpers
    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.toks[j][0] if j < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text.rstrip())

    def fail(self, msg: str):
        if self.i >= len(self.toks):
            raise ParseError(f"{msg}: unexpected end of input", self.pos())
        raise ParseError(f"{msg}: unexpected {self.peek()!r}", self.pos())

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            self.fail(f"expected {expected!r}" if expected else "expected a token")
        self.i += 1
        return tok

    def name(self, what: str) -> str:
        tok = self.peek()
        if tok is None or not (tok[0].isalpha() or tok[0] == "_"):
            self.fail(f"expected {what}")
        self.i += 1
        return tok

    # -- grammar
    def parse(self) -> A.Formula:
        phi = self.formula()
        if self.peek() is not None:
            self.fail("trailing input")
        return phi

    def formula(self) -> A.Formula:
        left = self.implies()
        while self.peek() == "<->":
            self.take()
            left = A.Iff(left, self.implies())
        return left

    def implies(self) -> A.Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return A.Implies(left, self.implies())
        return left

    def disj(self) -> A.Formula:
        left = self.conj()
        while self.peek() == "|":
            self.take()
            left = A.Or(left, self.conj())
        return left

    def conj(self) -> A.Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = A.And(left, self.unary())
        return left

    def unary(self) -> A.Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return A.Not(self.unary())
        if tok in ELEM_QUANT or tok in SET_QUANT:
            return self.quantifier()
        if tok == "(":
            self.take()
            phi = self.formula()
            self.take(")")
            return phi
        return self.atom()

    def quantifier(self) -> A.Formula:
        start = self.pos()
        word = self.take()
        ctor = ELEM_QUANT.get(word) or SET_QUANT[word]
        want_set = word in SET_QUANT
        names = []
        while self.peek() not in (".", None):
            nm = self.name("a variable")
            if nm in RESERVED:
                raise ParseError(f"reserved word {nm!r} used as a variable", start)
            if A.is_set_var(nm) != want_set:
                kind = "set variables (uppercase)" if want_set else "element variables (lowercase)"
                raise ParseError(f"{word} binds {kind}, got {nm!r}", start)
            names.append(nm)
        if not names:
            self.fail("expected a variable")
        self.take(".")
        body = self.formula()
        for nm in reversed(names):
            body = ctor(nm, body)
        return body

    def cell(self) -> A.Cell:
        lits = []
        while self.peek() not in ("]", ";", None):
            positive = True
            if self.peek() == "~":
                self.take()
                positive = False
            nm = self.name("a set variable")
            if not A.is_set_var(nm) or nm in RESERVED:
                raise ParseError(f"cells are built from set variables, got {nm!r}", self.pos())
            lits.append((nm, positive))
            if self.peek() == ",":
                self.take()
        return tuple(lits)

    def cell_atom(self, word: str) -> A.Formula:
        self.take("[")
        if word == "Color":
            color = self.name("a color name")
            self.take(";")
            c = self.cell()
            self.take("]")
            return A.CellColor(color, c)
        c = self.cell()
        if word == "E":
            self.take(";")
            d = self.cell()
            self.take("]")
            return A.CellEdge(c, d)
        self.take("]")
        return {"Zero": A.CellZero, "Atomic": A.CellAtomic, "Orphan": A.CellOrphan}[word](c)

    def atom(self) -> A.Formula:
        tok = self.peek()
        if tok is None:
            self.fail("expected a formula")
        if tok in ("true", "false"):
            self.take()
            return A.Const(tok == "true")
        if tok == "OrphanEmpty":
            self.take()
            return A.OrphanEmpty()
        if tok in ("E", "Orphan", "Zero", "Atomic", "Color") and self.peek(1) == "[":
            self.take()
            return self.cell_atom(tok)
        if tok == "E":
            self.take()
            self.take("(")
            a = self.term()
            self.take(",")
            b = self.term()
            self.take(")")
            return A.Edge(a, b)
        if tok == "Orphan":
            self.take()
            self.take("(")
            a = self.term()
            self.take(")")
            return A.Orphan(a)
        if tok[0].islower() and tok not in RESERVED and self.peek(1) == "(":
            self.take()
            self.take("(")
            a = self.term()
            self.take(")")
            return A.Color(tok, a)
        left = self.term()
        op = self.peek()
        if op == "=":
            self.take()
            return A.Eq(left, self.term())
        if op == "!=":
            self.take()
            return A.Not(A.Eq(left, self.term()))
        if op == "in":
            self.take()
            nm = self.name("a set variable")
            if not A.is_set_var(nm) or nm in RESERVED:
                raise ParseError(f"expected a set variable, got {nm!r}", self.pos())
            return A.Member(left, nm)
        self.fail("expected '=', '!=' or 'in'")

    def term(self) -> A.Term:
        tok = self.peek()
        if tok == "f":
            self.take()
            self.take("(")
            inner = self.term()
            self.take(")")
            return A.F(inner)
        nm = self.name("a term")
        if nm in RESERVED or not nm[0].islower():
            raise ParseError(f"expected an element variable, got {nm!r}", self.pos())
        return A.Var(nm)


def parse(text: str, dialect: str | None = None, free=()) -> A.Formula:
    """Parse ``text``.

    ``dialect`` is ``"f"``, ``"pf"`` or ``None`` (infer, but never both).
    Free variables other than those listed in ``free`` are rejected.
    """
    phi = _Parser(text).parse()
    has_f = A.uses_function(phi)
    has_graph = A.uses_graph_vocabulary(phi)
    if has_f and has_graph:
        raise ParseError("formula mixes the function symbol with graph vocabulary")
    if dialect == "f" and has_graph:
        raise ParseError("graph vocabulary is not allowed in the function dialect")
    if dialect == "pf" and has_f:
        raise ParseError("the function symbol is not allowed in the PF-graph dialect")
    unbound = A.free_vars(phi) - set(free)
    if unbound:
        raise ParseError(f"unbound variable(s): {', '.join(sorted(unbound))}")
    return phi


def dialect_of(phi: A.Formula) -> str:
    return "f" if A.uses_function(phi) else "pf"
