"""Elimination of the unary function symbol.

Every atom mentioning ``f`` is replaced by an existential over the
intermediate points of its ``f``-chains, with ``f(u) = w`` written as
``E(u,w)``.  The result is conjoined with ``OrphanEmpty`` so that its models
are exactly function graphs.
"""

from __future__ import annotations

from . import ast as A


class TranslationError(ValueError):
    pass


class _Fresh:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)

    def prime(self, base: str) -> str:
        name = base + "'"
        while name in self.taken:
            name += "'"
        self.taken.add(name)
        return name

    def value(self) -> str:
        name, i = "z", 0
        while name in self.taken:
            i += 1
            name = f"z{i}"
        self.taken.add(name)
        return name


def _chain(src: str, k: int, end: str | None, fresh: _Fresh, new: list[str]) -> tuple[list[A.Formula], str]:
    """Edges ``src -> ... -> end`` of length ``k``; a fresh endpoint is made when ``end`` is None."""
    edges = []
    cur = src
    for i in range(k):
        last = i == k - 1
        if last and end is not None:
            nxt = end
        else:
            nxt = fresh.prime(cur) if not last else fresh.value()
            new.append(nxt)
        edges.append(A.Edge(A.Var(cur), A.Var(nxt)))
        cur = nxt
    return edges, cur


def _flatten_eq(phi: A.Eq, fresh: _Fresh) -> A.Formula:
    (x, k), (y, m) = A.unwind(phi.left), A.unwind(phi.right)
    if k == 0 and m == 0:
        return phi
    new: list[str] = []
    if m == 0:
        edges, _ = _chain(x, k, y, fresh, new)
    elif k == 0:
        edges, _ = _chain(y, m, x, fresh, new)
    else:
        # both sides applied: walk to a shared value point
        lead_l: list[str] = []
        el, pl = _chain_prefix(x, k - 1, fresh, lead_l)
        lead_r: list[str] = []
        er, pr = _chain_prefix(y, m - 1, fresh, lead_r)
        z = fresh.value()
        new = lead_l + lead_r + [z]
        edges = el + [A.Edge(A.Var(pl), A.Var(z))] + er + [A.Edge(A.Var(pr), A.Var(z))]
    return A.exists_many(new, A.conj(edges))


def _chain_prefix(src: str, k: int, fresh: _Fresh, new: list[str]) -> tuple[list[A.Formula], str]:
    edges = []
    cur = src
    for _ in range(k):
        nxt = fresh.prime(cur)
        new.append(nxt)
        edges.append(A.Edge(A.Var(cur), A.Var(nxt)))
        cur = nxt
    return edges, cur


def _flatten_unary(phi: A.Formula, term: A.Term, rebuild, fresh: _Fresh) -> A.Formula:
    x, k = A.unwind(term)
    if k == 0:
        return phi
    new: list[str] = []
    edges, end = _chain(x, k, None, fresh, new)
    return A.exists_many(new, A.conj(edges + [rebuild(A.Var(end))]))


def _rewrite(phi: A.Formula, fresh: _Fresh) -> A.Formula:
    if isinstance(phi, A.Eq):
        return _flatten_eq(phi, fresh)
    if isinstance(phi, A.Color):
        return _flatten_unary(phi, phi.arg, lambda t: A.Color(phi.name, t), fresh)
    if isinstance(phi, A.Member):
        return _flatten_unary(phi, phi.elem, lambda t: A.Member(t, phi.setvar), fresh)
    if isinstance(phi, (A.Edge, A.Orphan, A.OrphanEmpty) + A.CELL_ATOMS):
        raise TranslationError(f"graph vocabulary in function-dialect input: {phi}")
    if isinstance(phi, A.Not):
        return A.Not(_rewrite(phi.body, fresh))
    if isinstance(phi, A.BINARY):
        return type(phi)(_rewrite(phi.left, fresh), _rewrite(phi.right, fresh))
    if isinstance(phi, A.QUANTIFIERS):
        return type(phi)(phi.var, _rewrite(phi.body, fresh))
    return phi


def eliminate_functions(phi: A.Formula) -> A.Formula:
    """Function-free formula with the same spectrum, conjoined with ``OrphanEmpty``."""
    fresh = _Fresh(A.all_vars(phi))
    return A.And(_rewrite(phi, fresh), A.OrphanEmpty())
