"""Tarskian evaluation of formulas over a concrete PF-graph.

Element variables denote vertices, set variables denote vertex sets encoded as
bitmasks.  Set quantifiers range over all ``2**n`` subsets.
"""

from __future__ import annotations

from typing import Mapping

from ..pfgraph import AnyGraph, GraphError, undot
from . import ast as A


class EvalError(ValueError):
    pass


class _Model:
    __slots__ = ("n", "full", "parent", "colors", "orphans")

    def __init__(self, x: AnyGraph):
        g = undot(x)
        self.n = g.n
        self.full = g.full_mask
        self.parent = g.parent
        self.colors = dict(zip(g.palette, g.color_masks))
        self.orphans = sum(1 << v for v in g.orphans)

    def color(self, name: str) -> int:
        try:
            return self.colors[name]
        except KeyError:
            raise EvalError(f"color {name!r} is not in the palette") from None


def _term(m: _Model, t: A.Term, env) -> int:
    if isinstance(t, A.Var):
        try:
            return env[t.name]
        except KeyError:
            raise EvalError(f"unbound variable {t.name!r}") from None
    v = _term(m, t.arg, env)
    p = m.parent[v]
    if p == -1:
        raise EvalError(f"f is undefined at vertex {v} (orphan)")
    return p


def _cell(m: _Model, c: A.Cell, env) -> int:
    mask = m.full
    for name, positive in c:
        try:
            s = env[name]
        except KeyError:
            raise EvalError(f"unbound variable {name!r}") from None
        mask &= s if positive else ~s
    return mask & m.full


def _single(mask: int) -> int:
    """Index of the unique element of ``mask`` or -1."""
    if mask and not mask & (mask - 1):
        return mask.bit_length() - 1
    return -1


def _ev(m: _Model, phi: A.Formula, env: dict) -> bool:
    t = type(phi)
    if t is A.And:
        return _ev(m, phi.left, env) and _ev(m, phi.right, env)
    if t is A.Or:
        return _ev(m, phi.left, env) or _ev(m, phi.right, env)
    if t is A.Not:
        return not _ev(m, phi.body, env)
    if t is A.Implies:
        return (not _ev(m, phi.left, env)) or _ev(m, phi.right, env)
    if t is A.Iff:
        return _ev(m, phi.left, env) == _ev(m, phi.right, env)
    if t is A.Exists or t is A.Forall:
        want = t is A.Exists
        saved = env.get(phi.var, None)
        had = phi.var in env
        domain = range(1 << m.n) if A.is_set_var(phi.var) else range(m.n)
        result = not want
        for val in domain:
            env[phi.var] = val
            if _ev(m, phi.body, env) == want:
                result = want
                break
        if had:
            env[phi.var] = saved
        else:
            del env[phi.var]
        return result
    if t is A.Eq:
        return _term(m, phi.left, env) == _term(m, phi.right, env)
    if t is A.Edge:
        return m.parent[_term(m, phi.src, env)] == _term(m, phi.dst, env)
    if t is A.Member:
        try:
            s = env[phi.setvar]
        except KeyError:
            raise EvalError(f"unbound variable {phi.setvar!r}") from None
        return bool(s >> _term(m, phi.elem, env) & 1)
    if t is A.Color:
        return bool(m.color(phi.name) >> _term(m, phi.arg, env) & 1)
    if t is A.Orphan:
        return m.parent[_term(m, phi.arg, env)] == -1
    if t is A.OrphanEmpty:
        return m.orphans == 0
    if t is A.Const:
        return phi.value
    if t is A.CellZero:
        return _cell(m, phi.cell, env) == 0
    if t is A.CellAtomic:
        return _single(_cell(m, phi.cell, env)) >= 0
    if t is A.CellOrphan:
        v = _single(_cell(m, phi.cell, env))
        return v >= 0 and m.parent[v] == -1
    if t is A.CellColor:
        v = _single(_cell(m, phi.cell, env))
        return v >= 0 and bool(m.color(phi.name) >> v & 1)
    if t is A.CellEdge:
        v = _single(_cell(m, phi.src, env))
        w = _single(_cell(m, phi.dst, env))
        return v >= 0 and w >= 0 and m.parent[v] == w
    raise TypeError(f"not a formula: {phi!r}")


def evaluate(phi: A.Formula, x: AnyGraph, env: Mapping[str, int] | None = None) -> bool:
    """Truth value of ``phi`` in ``x``; sets in ``env`` may be bitmasks or iterables of vertices."""
    m = _Model(x)
    e = {}
    for k, v in (env or {}).items():
        if A.is_set_var(k) and not isinstance(v, int):
            v = sum(1 << u for u in v)
        e[k] = v
    missing = A.free_vars(phi) - set(e)
    if missing:
        raise EvalError(f"unbound variable(s): {', '.join(sorted(missing))}")
    for k, v in e.items():
        if not A.is_set_var(k) and not 0 <= v < m.n:
            raise GraphError(f"{k} = {v} is not a vertex")
    return _ev(m, phi, e)
