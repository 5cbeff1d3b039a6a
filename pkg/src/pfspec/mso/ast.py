"""Formula syntax trees.

Three layers share one tree type:

* the function dialect: equalities, colors and memberships over terms built
  from variables with the unary symbol ``f``;
* the PF-graph dialect: ``E(x,y)``, ``Orphan(x)``, ``OrphanEmpty`` and the
  shared atoms, no function symbol;
* cell atoms over set variables (``Zero[..]``, ``Atomic[..]`` ...), the
  quantifier-free vocabulary of the Boolean associate.  Hintikka formulas are
  written in this layer.

Element variables start lowercase, set variables uppercase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class F:
    arg: "Term"

    def __str__(self):
        return f"f({self.arg})"


Term = Union[Var, F]


def unwind(t: Term) -> tuple[str, int]:
    """``f^k(x)`` -> ``(x, k)``."""
    k = 0
    while isinstance(t, F):
        t = t.arg
        k += 1
    return t.name, k


# A cell is a conjunction of set literals: ((name, positive), ...).  The empty
# cell is the whole universe.
Cell = tuple[tuple[str, bool], ...]


# -- formulas ----------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        from .printer import to_text
        return to_text(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Edge(Formula):
    src: Term
    dst: Term


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Color(Formula):
    name: str
    arg: Term


@dataclass(frozen=True)
class Orphan(Formula):
    arg: Term


@dataclass(frozen=True)
class Member(Formula):
    elem: Term
    setvar: str


@dataclass(frozen=True)
class OrphanEmpty(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


# cell atoms

@dataclass(frozen=True)
class CellZero(Formula):
    cell: Cell


@dataclass(frozen=True)
class CellAtomic(Formula):
    cell: Cell


@dataclass(frozen=True)
class CellEdge(Formula):
    src: Cell
    dst: Cell


@dataclass(frozen=True)
class CellColor(Formula):
    name: str
    cell: Cell


@dataclass(frozen=True)
class CellOrphan(Formula):
    cell: Cell


CELL_ATOMS = (CellZero, CellAtomic, CellEdge, CellColor, CellOrphan)
BINARY = (And, Or, Implies, Iff)
QUANTIFIERS = (Exists, Forall)


def is_set_var(name: str) -> bool:
    return name[:1].isupper()


def conj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return Const(True)
    if len(parts) <= 8:
        out = parts[0]
        for p in parts[1:]:
            out = And(out, p)
        return out
    # long conjunctions are balanced to keep recursion shallow
    mid = len(parts) // 2
    return And(conj(parts[:mid]), conj(parts[mid:]))


def exists_many(names, body: Formula) -> Formula:
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


# -- traversal ---------------------------------------------------------------

def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, QUANTIFIERS):
        return (phi.body,)
    return ()


def walk(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(children(node))


def depth(phi: Formula) -> int:
    """Quantifier nesting depth; element and set quantifiers both count."""
    if isinstance(phi, QUANTIFIERS):
        return 1 + depth(phi.body)
    return max((depth(c) for c in children(phi)), default=0)


def atom_terms(phi: Formula) -> tuple[Term, ...]:
    if isinstance(phi, (Edge, Eq)):
        return (phi.src, phi.dst) if isinstance(phi, Edge) else (phi.left, phi.right)
    if isinstance(phi, (Color, Orphan)):
        return (phi.arg,)
    if isinstance(phi, Member):
        return (phi.elem,)
    return ()


def _cell_vars(phi: Formula) -> set[str]:
    if isinstance(phi, CellEdge):
        return {n for n, _ in phi.src} | {n for n, _ in phi.dst}
    if isinstance(phi, CELL_ATOMS):
        return {n for n, _ in phi.cell}
    return set()


def free_vars(phi: Formula) -> set[str]:
    if isinstance(phi, QUANTIFIERS):
        return free_vars(phi.body) - {phi.var}
    out = {unwind(t)[0] for t in atom_terms(phi)}
    if isinstance(phi, Member):
        out.add(phi.setvar)
    out |= _cell_vars(phi)
    for c in children(phi):
        out |= free_vars(c)
    return out


def all_vars(phi: Formula) -> set[str]:
    out = set()
    for node in walk(phi):
        if isinstance(node, QUANTIFIERS):
            out.add(node.var)
        out |= free_vars(node) if not children(node) else set()
    return out


def uses_function(phi: Formula) -> bool:
    return any(isinstance(t, F) for node in walk(phi) for t in atom_terms(node))


def uses_graph_vocabulary(phi: Formula) -> bool:
    return any(isinstance(node, (Edge, Orphan, OrphanEmpty) + CELL_ATOMS) for node in walk(phi))


def colors_used(phi: Formula) -> set[str]:
    return {node.name for node in walk(phi) if isinstance(node, (Color, CellColor))}
