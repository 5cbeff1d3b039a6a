"""Canonical forms and isomorphism-free generation of PF-graphs.

Every component of a PF-graph is either a rooted tree or a cycle with rooted
trees hanging off it, so canonization reduces to sorted child encodings
(trees) plus the least rotation of the hanging-tree sequence (cycles).

Codes are nested tuples ``(label, children)`` where ``label`` is an int whose
low bits are the palette colors, followed by a dot bit and any extra marker
sets passed by the caller.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterator, Sequence

from .pfgraph import (AnyGraph, DottedPFGraph, PFGraph, StructureClass, classify,
                      in_class, undot)


def vertex_labels(x: AnyGraph, extra: Sequence[int] = ()) -> list[int]:
    g = undot(x)
    c = len(g.palette)
    labels = [0] * g.n
    for i, cs in enumerate(g.colors):
        for v in cs:
            labels[v] |= 1 << i
    if isinstance(x, DottedPFGraph):
        labels[x.dot] |= 1 << c
    for i, mask in enumerate(extra):
        bit = 1 << (c + 1 + i)
        for v in range(g.n):
            if mask >> v & 1:
                labels[v] |= bit
    return labels


def _min_rotation(seq: tuple) -> tuple:
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


def component_codes(parent: Sequence[int], labels: Sequence[int]) -> list[tuple]:
    """Canonical codes of the components, sorted."""
    n = len(parent)
    kids: list[list[int]] = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p != -1:
            kids[p].append(v)
    # cyclic vertices
    state = [0] * n
    cyclic = [False] * n
    for s in range(n):
        walk = []
        v = s
        while v != -1 and state[v] == 0:
            state[v] = 1
            walk.append(v)
            v = parent[v]
        if v != -1 and state[v] == 1:
            for w in walk[walk.index(v):]:
                cyclic[w] = True
        for w in walk:
            state[w] = 2
    tops = [v for v in range(n) if parent[v] == -1 or cyclic[v]]
    order = []
    stack = list(tops)
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(c for c in kids[v] if not cyclic[c])
    code: list = [None] * n
    for v in reversed(order):
        code[v] = (labels[v], tuple(sorted(code[c] for c in kids[v] if not cyclic[c])))
    comps = []
    seen = [False] * n
    for v in tops:
        if parent[v] == -1:
            comps.append((0, code[v]))
        elif not seen[v]:
            ring = []
            w = v
            while not seen[w]:
                seen[w] = True
                ring.append(code[w])
                w = parent[w]
            comps.append((1, _min_rotation(tuple(ring))))
    comps.sort()
    return comps


def canon(x: AnyGraph, extra: Sequence[int] = ()) -> tuple:
    """Hashable canonical form; equal iff isomorphic (colors, dot and extra sets kept)."""
    g = undot(x)
    return (g.palette, isinstance(x, DottedPFGraph), len(extra),
            tuple(component_codes(g.parent, vertex_labels(x, extra))))


def canonical_key(x: AnyGraph, extra: Sequence[int] = ()) -> bytes:
    return repr(canon(x, extra)).encode()


def automorphism_count(x: AnyGraph) -> int:
    """Number of vertex permutations mapping ``x`` onto itself (brute force)."""
    g = undot(x)
    dot = x.dot if isinstance(x, DottedPFGraph) else None
    count = 0
    for perm in itertools.permutations(range(g.n)):
        if dot is not None and perm[dot] != dot:
            continue
        if g.relabel(perm) == g:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Building graphs from codes

def graph_from_codes(comps: Sequence[tuple], palette: Sequence[str] = ()) -> PFGraph:
    return _build(comps, palette)[0]


def canonical_form(x: AnyGraph) -> AnyGraph:
    """The representative of the isomorphism class of ``x`` rebuilt from its codes."""
    g = undot(x)
    built, labels = _build(canon(x)[3], g.palette)
    if isinstance(x, DottedPFGraph):
        bit = 1 << len(g.palette)
        return DottedPFGraph(built, next(v for v, lab in enumerate(labels) if lab & bit))
    return built


def _build(comps: Sequence[tuple], palette: Sequence[str]) -> tuple[PFGraph, list[int]]:
    parent: list[int] = []
    labels: list[int] = []

    def add_tree(code, par):
        # iterative: (code, parent index)
        stack = [(code, par)]
        while stack:
            (lab, kids), p = stack.pop()
            v = len(parent)
            parent.append(p)
            labels.append(lab)
            stack.extend((k, v) for k in reversed(kids))

    for kind, body in comps:
        if kind == 0:
            add_tree(body, -1)
        else:
            start = len(parent)
            heads = []
            for lab, kids in body:
                v = len(parent)
                heads.append(v)
                parent.append(-2)
                labels.append(lab)
                for k in kids:
                    add_tree(k, v)
            for i, v in enumerate(heads):
                parent[v] = heads[(i + 1) % len(heads)]
            assert parent[start] != -2
    c = len(palette)
    colors = tuple(frozenset(v for v, lab in enumerate(labels) if lab >> i & 1) for i in range(c))
    return PFGraph(len(parent), tuple(parent), tuple(palette), colors), labels


# ---------------------------------------------------------------------------
# Orderly generation

@lru_cache(maxsize=None)
def rooted_trees(k: int, nlabels: int = 1) -> tuple:
    """All canonical rooted-tree codes with ``k`` vertices, sorted."""
    if k < 1:
        return ()
    out = []
    for ms in _multisets(k - 1, nlabels, "tree"):
        kids = tuple(sorted(ms))
        out.extend((lab, kids) for lab in range(nlabels))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def cyclic_components(k: int, nlabels: int = 1) -> tuple:
    """Canonical codes ``(1, ring)`` of connected function graphs with ``k`` vertices."""
    out = []
    for m in range(1, k + 1):
        for sizes in _compositions(k, m):
            pools = [rooted_trees(s, nlabels) for s in sizes]
            for ring in itertools.product(*pools):
                if ring == _min_rotation(ring):
                    out.append((1, ring))
    return tuple(sorted(out))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _pool(kind: str, k: int, nlabels: int) -> tuple:
    if kind == "tree":
        return rooted_trees(k, nlabels)
    if kind == "rtree":
        return tuple((0, t) for t in rooted_trees(k, nlabels))
    if kind == "cyc":
        return cyclic_components(k, nlabels)
    if kind == "any":
        return _pool("rtree", k, nlabels) + cyclic_components(k, nlabels)
    raise ValueError(kind)


@lru_cache(maxsize=None)
def _multisets(total: int, nlabels: int, kind: str) -> tuple:
    """All multisets (as tuples) of pool items whose sizes sum to ``total``."""
    items = [(size, code) for size in range(1, total + 1) for code in _pool(kind, size, nlabels)]
    out = []

    def rec(start, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for i in range(start, len(items)):
            size, code = items[i]
            if size > remaining:
                break
            acc.append(code)
            rec(i, remaining - size, acc)
            acc.pop()

    rec(0, total, [])
    return tuple(out)


def enumerate_class(tag: StructureClass, n: int, palette: Sequence[str] = ()) -> Iterator[AnyGraph]:
    """One representative per isomorphism class, in a fixed order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    palette = tuple(palette)
    nl = 1 << len(palette)
    if tag is StructureClass.FUNCTION_GRAPH:
        for ms in _multisets(n, nl, "cyc"):
            yield graph_from_codes(sorted(ms), palette)
    elif tag is StructureClass.FOREST:
        for ms in _multisets(n, nl, "rtree"):
            yield graph_from_codes(sorted(ms), palette)
    elif tag is StructureClass.TREE:
        for t in rooted_trees(n, nl):
            yield graph_from_codes([(0, t)], palette)
    elif tag is StructureClass.GENERAL:
        for ms in _multisets(n, nl, "any"):
            yield graph_from_codes(sorted(ms), palette)
    elif tag is StructureClass.DOTTED_FOREST:
        yield from dotted_versions(enumerate_class(StructureClass.FOREST, n, palette))
    elif tag is StructureClass.DOTTED_SINGLETON_FUNCTION_GRAPH:
        if n == 1:
            for lab in range(nl):
                g = graph_from_codes([(1, ((lab, ()),))], palette)
                yield DottedPFGraph(g, 0)
    else:
        raise ValueError(tag)


def dotted_versions(graphs) -> Iterator[DottedPFGraph]:
    for g in graphs:
        seen = set()
        for v in range(g.n):
            d = DottedPFGraph(g, v)
            k = canon(d)
            if k not in seen:
                seen.add(k)
                yield d


def enumerate_upto(tag: StructureClass, n_max: int, palette: Sequence[str] = ()) -> Iterator[AnyGraph]:
    for n in range(1, n_max + 1):
        yield from enumerate_class(tag, n, palette)


# ---------------------------------------------------------------------------
# Brute-force oracle

def labeled_quotient(tag: StructureClass, n: int, palette: Sequence[str] = ()) -> dict[tuple, AnyGraph]:
    """Quotient of all labeled structures of the class by canonical form.

    Runs over every parent map in ``{-1, 0..n-1}^n`` and every coloring, so it
    is only usable for very small ``n``.
    """
    palette = tuple(palette)
    out: dict[tuple, AnyGraph] = {}
    dotted = tag in (StructureClass.DOTTED_FOREST, StructureClass.DOTTED_SINGLETON_FUNCTION_GRAPH)
    colorings = list(itertools.product(range(1 << len(palette)), repeat=n))
    for parent in itertools.product(range(-1, n), repeat=n):
        for lab in colorings:
            cols = tuple(frozenset(v for v in range(n) if lab[v] >> i & 1) for i in range(len(palette)))
            g = PFGraph(n, parent, palette, cols)
            cands = [DottedPFGraph(g, v) for v in range(n)] if dotted else [g]
            for x in cands:
                if in_class(x, tag):
                    out.setdefault(canon(x), x)
    return out


def labeled_count(tag: StructureClass, n: int) -> int:
    """Closed-form labeled counts for colorless function graphs and forests."""
    if tag is StructureClass.FUNCTION_GRAPH:
        return n ** n
    if tag is StructureClass.FOREST:
        return (n + 1) ** (n - 1)  # rooted forests on n labeled vertices
    raise ValueError(tag)


def orbit_size(x: AnyGraph) -> int:
    return math.factorial(undot(x).n) // automorphism_count(x)


__all__ = [
    "canon", "canonical_key", "automorphism_count", "enumerate_class", "enumerate_upto",
    "dotted_versions", "labeled_quotient", "labeled_count", "orbit_size", "graph_from_codes",
    "canonical_form",
    "rooted_trees", "cyclic_components", "classify",
]
