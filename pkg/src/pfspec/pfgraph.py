"""Colored partial-function graphs and the composition operations on them.

A PF-graph on vertices ``0..n-1`` is stored as its parent function: ``parent[v]``
is the unique target of the outgoing edge of ``v`` or ``-1`` when ``v`` is an
orphan.  The Orphan relation is always derived from ``parent``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union


class GraphError(ValueError):
    """Malformed graph or operands of the wrong shape for an operation."""


@dataclass(frozen=True)
class PFGraph:
    n: int
    parent: tuple[int, ...]
    palette: tuple[str, ...] = ()
    colors: tuple[frozenset[int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("PF-graphs are nonempty")
        if len(self.parent) != self.n:
            raise GraphError("parent list has wrong length")
        for v, p in enumerate(self.parent):
            if not (p == -1 or 0 <= p < self.n):
                raise GraphError(f"vertex {v} has parent {p} outside the graph")
        if not self.colors:
            object.__setattr__(self, "colors", tuple(frozenset() for _ in self.palette))
        if len(self.colors) != len(self.palette):
            raise GraphError("one color set per palette name is required")
        if len(set(self.palette)) != len(self.palette):
            raise GraphError("duplicate palette name")
        for name, cs in zip(self.palette, self.colors):
            if any(not 0 <= v < self.n for v in cs):
                raise GraphError(f"color {name!r} mentions a vertex outside the graph")

    @classmethod
    def build(cls, n: int, edges: Iterable[Sequence[int]] = (),
              colors: Mapping[str, Iterable[int]] | None = None,
              palette: Sequence[str] | None = None) -> "PFGraph":
        """Build from ``(child, parent)`` pairs; rejects a second edge out of a vertex."""
        parent = [-1] * n
        for child, par in edges:
            if not 0 <= child < n:
                raise GraphError(f"edge source {child} outside the graph")
            if parent[child] != -1:
                raise GraphError(f"vertex {child} has two outgoing edges")
            parent[child] = par
        colors = dict(colors or {})
        if palette is None:
            palette = sorted(colors)
        unknown = set(colors) - set(palette)
        if unknown:
            raise GraphError(f"colors {sorted(unknown)} are not in the palette")
        return cls(n, tuple(parent), tuple(palette),
                   tuple(frozenset(colors.get(c, ())) for c in palette))

    # -- derived structure -------------------------------------------------

    @cached_property
    def orphans(self) -> frozenset[int]:
        return frozenset(v for v, p in enumerate(self.parent) if p == -1)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent):
            if p != -1:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def cyclic(self) -> frozenset[int]:
        """Vertices lying on a cycle."""
        state = [0] * self.n  # 0 new, 1 on current walk, 2 done
        out = set()
        for s in range(self.n):
            walk = []
            v = s
            while v != -1 and state[v] == 0:
                state[v] = 1
                walk.append(v)
                v = self.parent[v]
            if v != -1 and state[v] == 1:
                i = walk.index(v)
                out.update(walk[i:])
            for w in walk:
                state[w] = 2
        return frozenset(out)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def color_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << v for v in cs) for cs in self.colors)

    def color_of(self, name: str) -> frozenset[int]:
        try:
            return self.colors[self.palette.index(name)]
        except ValueError:
            raise GraphError(f"unknown color {name!r}") from None

    def is_function_graph(self) -> bool:
        return not self.orphans

    def is_forest(self) -> bool:
        return not self.cyclic

    # -- transformations ---------------------------------------------------

    def relabel(self, perm: Sequence[int]) -> "PFGraph":
        """Image under the vertex bijection ``v -> perm[v]``."""
        parent = [-1] * self.n
        for v, p in enumerate(self.parent):
            parent[perm[v]] = -1 if p == -1 else perm[p]
        cols = tuple(frozenset(perm[v] for v in cs) for cs in self.colors)
        return PFGraph(self.n, tuple(parent), self.palette, cols)

    def induced(self, vertices: Iterable[int]) -> tuple["PFGraph", dict[int, int]]:
        """Substructure on ``vertices``; edges leaving the set are dropped.

        Returns the subgraph together with the old-to-new vertex map.
        """
        vs = sorted(set(vertices))
        index = {v: i for i, v in enumerate(vs)}
        parent = tuple(index.get(self.parent[v], -1) for v in vs)
        cols = tuple(frozenset(index[v] for v in cs if v in index) for cs in self.colors)
        return PFGraph(len(vs), parent, self.palette, cols), index

    def with_parent(self, updates: Mapping[int, int]) -> "PFGraph":
        parent = list(self.parent)
        for v, p in updates.items():
            parent[v] = p
        return PFGraph(self.n, tuple(parent), self.palette, self.colors)

    def __repr__(self):
        cols = {c: sorted(s) for c, s in zip(self.palette, self.colors) if s}
        return f"PFGraph(n={self.n}, parent={list(self.parent)}" + (f", colors={cols})" if cols else ")")


@dataclass(frozen=True)
class DottedPFGraph:
    graph: PFGraph
    dot: int

    def __post_init__(self):
        if not 0 <= self.dot < self.graph.n:
            raise GraphError(f"dot {self.dot} is not a vertex")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def palette(self) -> tuple[str, ...]:
        return self.graph.palette


AnyGraph = Union[PFGraph, DottedPFGraph]


def undot(x: AnyGraph) -> PFGraph:
    return x.graph if isinstance(x, DottedPFGraph) else x


# ---------------------------------------------------------------------------
# Classification

class StructureClass(enum.Enum):
    FUNCTION_GRAPH = "function_graph"
    FOREST = "forest"
    TREE = "tree"
    DOTTED_FOREST = "dotted_forest"
    DOTTED_SINGLETON_FUNCTION_GRAPH = "dotted_singleton_function_graph"
    GENERAL = "general"


@dataclass(frozen=True)
class Classification:
    tag: StructureClass
    components: tuple[PFGraph, ...]
    component_vertices: tuple[tuple[int, ...], ...]
    cycles: tuple[tuple[int, ...], ...] = field(default=())


def components(x: PFGraph) -> list[list[int]]:
    """Vertex sets of the connected components, ordered by least vertex."""
    root = list(range(x.n))

    def find(v):
        while root[v] != v:
            root[v] = root[root[v]]
            v = root[v]
        return v

    for v, p in enumerate(x.parent):
        if p != -1:
            a, b = find(v), find(p)
            if a != b:
                root[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for v in range(x.n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def cycle_of(x: PFGraph, comp: Iterable[int]) -> tuple[int, ...]:
    """The cycle of an orphanless component, walked along parent edges from its least vertex."""
    cyc = sorted(v for v in comp if v in x.cyclic)
    if not cyc:
        return ()
    out = [cyc[0]]
    v = x.parent[cyc[0]]
    while v != cyc[0]:
        out.append(v)
        v = x.parent[v]
    return tuple(out)


def classify(x: AnyGraph) -> Classification:
    g = undot(x)
    comps = components(g)
    cycles = tuple(c for c in (cycle_of(g, comp) for comp in comps) if c)
    if isinstance(x, DottedPFGraph):
        if g.is_forest():
            tag = StructureClass.DOTTED_FOREST
        elif g.n == 1:
            tag = StructureClass.DOTTED_SINGLETON_FUNCTION_GRAPH
        else:
            tag = StructureClass.GENERAL
    elif g.is_function_graph():
        tag = StructureClass.FUNCTION_GRAPH
    elif g.is_forest():
        tag = StructureClass.TREE if len(comps) == 1 else StructureClass.FOREST
    else:
        tag = StructureClass.GENERAL
    subs = tuple(g.induced(c)[0] for c in comps)
    return Classification(tag, subs, tuple(tuple(c) for c in comps), cycles)


def in_class(x: AnyGraph, tag: StructureClass) -> bool:
    """Membership test; trees count as forests and GENERAL admits every undotted graph."""
    if tag is StructureClass.GENERAL:
        return not isinstance(x, DottedPFGraph)
    got = classify(x).tag
    if tag is StructureClass.FOREST:
        return got in (StructureClass.FOREST, StructureClass.TREE)
    return got is tag


# ---------------------------------------------------------------------------
# Composition

def _check_palette(a: PFGraph, b: PFGraph):
    if a.palette != b.palette:
        raise GraphError(f"palette mismatch: {a.palette} vs {b.palette}")


def sum_graphs(x: PFGraph, y: PFGraph) -> PFGraph:
    """Disjoint union; the right operand is shifted past the left one."""
    if isinstance(x, DottedPFGraph) or isinstance(y, DottedPFGraph):
        raise GraphError("sum takes undotted graphs")
    _check_palette(x, y)
    off = x.n
    parent = x.parent + tuple(-1 if p == -1 else p + off for p in y.parent)
    cols = tuple(a | frozenset(v + off for v in b) for a, b in zip(x.colors, y.colors))
    return PFGraph(x.n + y.n, parent, x.palette, cols)


def singleton(palette: Sequence[str] = (), colors: Iterable[str] = (), loop: bool = False) -> PFGraph:
    colors = set(colors)
    return PFGraph(1, (0 if loop else -1,), tuple(palette),
                   tuple(frozenset([0]) if c in colors else frozenset() for c in palette))


def attach_root(x: PFGraph) -> PFGraph:
    """Add a fresh uncolored root that becomes the parent of every orphan."""
    if isinstance(x, DottedPFGraph) or not x.is_forest():
        raise GraphError("attach_root needs an undotted forest")
    return dotted_compose(Kind.DOT_INTO, x, DottedPFGraph(singleton(x.palette), 0))


class Kind(enum.Enum):
    SUM = "sum"                              # X + Y
    DOT_INTO = "dot_into"                    # X ∔ (Y,b)
    DOTTED_DOT = "dotted_dot"                # (X,a) ∔ (Y,b)
    CIRCULAR = "circular"                    # (X,a) ⊕ (Y,b)
    SUM_RIGHT_DOT = "sum_right_dot"          # X + (Y,b)
    DOT_PLUS_UNDOTTED = "dot_plus_undotted"  # (Y,b) ∔ X

    @property
    def shapes(self) -> tuple[bool, bool, bool]:
        """(left dotted, right dotted, result dotted)."""
        return _SHAPES[self]


_SHAPES = {
    Kind.SUM: (False, False, False),
    Kind.DOT_INTO: (False, True, False),
    Kind.DOTTED_DOT: (True, True, True),
    Kind.CIRCULAR: (True, True, False),
    Kind.SUM_RIGHT_DOT: (False, True, True),
    Kind.DOT_PLUS_UNDOTTED: (True, False, True),
}


def _reparent_orphans(g: PFGraph, vertices: Iterable[int], target: int) -> dict[int, int]:
    return {v: target for v in vertices if g.parent[v] == -1}


def dotted_compose(kind: Kind, left: AnyGraph, right: AnyGraph) -> AnyGraph:
    ldot, rdot, _ = kind.shapes
    if isinstance(left, DottedPFGraph) != ldot or isinstance(right, DottedPFGraph) != rdot:
        raise GraphError(f"operand shapes do not match {kind.value}")
    if kind is Kind.SUM:
        return sum_graphs(left, right)
    if kind is Kind.DOT_PLUS_UNDOTTED:
        # (Y,b) ∔ X = (X ∔ (Y,b), b)
        glued = dotted_compose(Kind.DOT_INTO, right, left)
        return DottedPFGraph(glued, right.n + left.dot)

    lg, rg = undot(left), undot(right)
    base = sum_graphs(lg, rg)
    off = lg.n
    if kind is Kind.SUM_RIGHT_DOT:
        return DottedPFGraph(base, right.dot + off)
    b = right.dot + off
    updates = _reparent_orphans(base, range(lg.n), b)
    if kind is Kind.DOT_INTO:
        return base.with_parent(updates)
    if kind is Kind.DOTTED_DOT:
        return DottedPFGraph(base.with_parent(updates), left.dot)
    # circular sum
    updates.update(_reparent_orphans(base, range(off, base.n), left.dot))
    return base.with_parent(updates)


# ---------------------------------------------------------------------------
# JSON

def to_json(x: AnyGraph) -> dict:
    g = undot(x)
    out = {
        "n": g.n,
        "edges": [[v, p] for v, p in enumerate(g.parent) if p != -1],
        "colors": {c: sorted(s) for c, s in zip(g.palette, g.colors)},
    }
    if isinstance(x, DottedPFGraph):
        out["dot"] = x.dot
    return out


def from_json(data: Mapping, palette: Sequence[str] | None = None) -> AnyGraph:
    try:
        n = int(data["n"])
        edges = [tuple(e) for e in data.get("edges", [])]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from None
    if any(len(e) != 2 for e in edges):
        raise GraphError("edges must be [child, parent] pairs")
    g = PFGraph.build(n, edges, data.get("colors", {}), palette)
    if data.get("dot") is not None:
        return DottedPFGraph(g, int(data["dot"]))
    return g


def load(path, palette: Sequence[str] | None = None) -> AnyGraph:
    with open(path) as fh:
        return from_json(json.load(fh), palette)


def dump(x: AnyGraph) -> str:
    return json.dumps(to_json(x), sort_keys=True)


# ---------------------------------------------------------------------------
# Small constructors used across the package and its tests

def cycle(m: int, palette: Sequence[str] = ()) -> PFGraph:
    return PFGraph(m, tuple((v + 1) % m for v in range(m)), tuple(palette))


def path(m: int, palette: Sequence[str] = ()) -> PFGraph:
    """``0 -> 1 -> ... -> m-1``; the last vertex is the orphan root."""
    return PFGraph(m, tuple(v + 1 if v + 1 < m else -1 for v in range(m)), tuple(palette))


def disjoint(graphs: Sequence[PFGraph]) -> PFGraph:
    out = graphs[0]
    for g in graphs[1:]:
        out = sum_graphs(out, g)
    return out
