"""Composition of theories and the fixpoint of realizable theories of class K.

Class K consists of function graphs, forests, dotted forests and dotted
singleton function graphs (a dotted self-loop).  Every member is built from
singletons by the rules in :data:`RULES`, and the theory of a composite only
depends on the theories of its parts, so the realizable theories can be
found by closing the singleton theories under the rules.

The closure is grown in stages of increasing witness size: stage ``s``
combines every pair of known theories whose witness sizes add up to ``s``.
A theory first met at stage ``s`` therefore gets a witness of size ``s``, and
the loop stops once ``s`` reaches twice the largest witness size without
anything new appearing.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .enumeration import canon, canonical_form, enumerate_class
from .pfgraph import (AnyGraph, DottedPFGraph, GraphError, Kind, PFGraph, StructureClass,
                      components, cycle_of, dotted_compose, from_json, singleton, to_json, undot)
from .theory import DEFAULT_ENGINE, ResourceLimit, TheoryEngine, TheoryError

TABLE_VERSION = 1


class K(enum.Enum):
    FG = "function_graph"
    FOREST = "forest"
    DFOREST = "dotted_forest"
    DSFG = "dotted_singleton_function_graph"

    @property
    def dotted(self) -> bool:
        return self in (K.DFOREST, K.DSFG)

    @property
    def structure_class(self) -> StructureClass:
        return {
            K.FG: StructureClass.FUNCTION_GRAPH,
            K.FOREST: StructureClass.FOREST,
            K.DFOREST: StructureClass.DOTTED_FOREST,
            K.DSFG: StructureClass.DOTTED_SINGLETON_FUNCTION_GRAPH,
        }[self]


# (kind, left class, right class, result class)
RULES: tuple[tuple[Kind, K, K, K], ...] = (
    (Kind.SUM, K.FG, K.FG, K.FG),
    (Kind.SUM, K.FOREST, K.FOREST, K.FOREST),
    (Kind.DOT_INTO, K.FOREST, K.DFOREST, K.FOREST),
    (Kind.DOT_INTO, K.FOREST, K.DSFG, K.FG),
    (Kind.DOTTED_DOT, K.DFOREST, K.DFOREST, K.DFOREST),
    (Kind.CIRCULAR, K.DFOREST, K.DFOREST, K.FG),
    (Kind.SUM_RIGHT_DOT, K.FOREST, K.DFOREST, K.DFOREST),
    (Kind.DOT_PLUS_UNDOTTED, K.DFOREST, K.FOREST, K.DFOREST),
)


def k_class(x: AnyGraph) -> K | None:
    g = undot(x)
    if isinstance(x, DottedPFGraph):
        if g.is_forest():
            return K.DFOREST
        if g.n == 1 and g.parent[0] == 0:
            return K.DSFG
        return None
    if g.is_function_graph():
        return K.FG
    if g.is_forest():
        return K.FOREST
    return None


def _colorings(palette: Sequence[str]) -> list[tuple[str, ...]]:
    return [tuple(c for i, c in enumerate(palette) if mask >> i & 1) for mask in range(1 << len(palette))]


def seeds(palette: Sequence[str] = ()) -> dict[K, list[AnyGraph]]:
    """The singleton members of K, one per coloring."""
    palette = tuple(palette)
    out = {c: [] for c in K}
    for cols in _colorings(palette):
        out[K.FOREST].append(singleton(palette, cols))
        out[K.FG].append(singleton(palette, cols, loop=True))
        out[K.DFOREST].append(DottedPFGraph(singleton(palette, cols), 0))
        out[K.DSFG].append(DottedPFGraph(singleton(palette, cols, loop=True), 0))
    return out


@dataclass
class Entry:
    tid: int
    cls: K
    witness: AnyGraph
    confirmed: bool = False

    @property
    def size(self) -> int:
        return undot(self.witness).n


@dataclass
class ClosureTable:
    d: int
    palette: tuple[str, ...]
    engine: TheoryEngine
    sweep_bound: int
    entries: dict[int, Entry] = field(default_factory=dict)
    order: list[int] = field(default_factory=list)
    ops: dict[tuple[Kind, int, int], int] = field(default_factory=dict)
    sweep_missing: list[AnyGraph] = field(default_factory=list)

    # -- queries
    def ids(self, cls: K | None = None) -> list[int]:
        return [t for t in self.order if cls is None or self.entries[t].cls is cls]

    def __contains__(self, tid: int) -> bool:
        return tid in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def min_witness(self, tid: int) -> tuple[AnyGraph, int]:
        try:
            e = self.entries[tid]
        except KeyError:
            raise TheoryError(f"theory {tid} is not in the table") from None
        return e.witness, e.size

    def max_witness_size(self, cls: K | None = None) -> int:
        return max(self.entries[t].size for t in self.ids(cls))

    @property
    def all_confirmed(self) -> bool:
        return all(e.confirmed for e in self.entries.values())

    def op(self, kind: Kind, t: int, u: int) -> int:
        """Theory of the composite of the stored witnesses of ``t`` and ``u``."""
        key = (kind, t, u)
        got = self.ops.get(key)
        if got is None:
            got = theory_op(kind, t, u, self.d, witnesses=self, engine=self.engine)
            self.ops[key] = got
        return got

    def fill_ops(self) -> None:
        """Compute every operation table entry among stored theories."""
        for kind, lc, rc, _ in RULES:
            for t in self.ids(lc):
                for u in self.ids(rc):
                    self.op(kind, t, u)

    # -- serialization
    def to_json(self) -> dict:
        dig = self.engine.digest
        theories = [{
            "digest": dig(t),
            "class": e.cls.value,
            "size": e.size,
            "confirmed": e.confirmed,
            "witness": to_json(e.witness),
        } for t, e in ((t, self.entries[t]) for t in self.order)]
        ops = sorted([k.value, dig(t), dig(u), dig(r)] for (k, t, u), r in self.ops.items())
        return {
            "version": TABLE_VERSION,
            "d": self.d,
            "palette": list(self.palette),
            "sweep_bound": self.sweep_bound,
            "max_witness_size": self.max_witness_size(),
            "theories": theories,
            "ops": ops,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict, engine: TheoryEngine | None = None) -> "ClosureTable":
        """Rebuild a table; every witness is re-checked against its digest."""
        engine = engine if engine is not None else DEFAULT_ENGINE
        if data.get("version") != TABLE_VERSION:
            raise ValueError(f"unsupported table version {data.get('version')}")
        palette = tuple(data["palette"])
        table = cls(data["d"], palette, engine, data["sweep_bound"])
        by_digest = {}
        for item in data["theories"]:
            w = from_json(item["witness"], palette)
            tid = engine.theory(w, table.d)
            if engine.digest(tid) != item["digest"]:
                raise ValueError("stored witness does not realize its theory")
            table.entries[tid] = Entry(tid, K(item["class"]), w, item["confirmed"])
            table.order.append(tid)
            by_digest[item["digest"]] = tid
        for kind, a, b, r in data["ops"]:
            table.ops[(Kind(kind), by_digest[a], by_digest[b])] = by_digest[r]
        return table


def theory_op(kind: Kind, t: int, u: int, d: int | None = None, witnesses=None,
              engine: TheoryEngine | None = None) -> int:
    """Theory of ``W_t <kind> W_u`` for any witnesses ``W``.

    Witnesses come from ``witnesses`` (a table) when given, else from the
    engine's registry of smallest realizers.
    """
    engine = engine if engine is not None else DEFAULT_ENGINE
    it, iu = engine.info(t), engine.info(u)
    if it.depth != iu.depth or it.palette != iu.palette:
        raise TheoryError("theories differ in depth or palette")
    if d is not None and it.depth != d:
        raise TheoryError("depth mismatch")
    ldot, rdot, _ = kind.shapes
    if it.dotted != ldot or iu.dotted != rdot:
        raise TheoryError(f"operand shapes do not match {kind.value}")

    def find(x):
        if witnesses is not None and x in witnesses:
            return witnesses.min_witness(x)[0]
        w = engine.witness(x)
        if w is None:
            raise TheoryError(f"no witness stored for theory {x}")
        return w

    return engine.theory(dotted_compose(kind, find(t), find(u)), it.depth)


# ---------------------------------------------------------------------------
# Growing the closure

@dataclass
class Limits:
    max_theories: int = 20000
    max_size: int = 12


def grow(d: int, palette: Sequence[str] = (), engine: TheoryEngine | None = None,
         limits: Limits | None = None) -> Iterator[Entry]:
    """Yield new theories of class K in order of witness size.

    Raises :class:`ResourceLimit` when a limit is hit before the fixpoint.
    """
    engine = engine if engine is not None else DEFAULT_ENGINE
    limits = limits or Limits()
    palette = tuple(palette)
    known: dict[int, Entry] = {}
    by_size: dict[K, dict[int, list[Entry]]] = {c: {} for c in K}

    def add(cls, w):
        tid = engine.theory(w, d)
        if tid in known:
            return None
        if len(known) >= limits.max_theories:
            raise ResourceLimit("number of theories", limits.max_theories)
        e = Entry(tid, cls, canonical_form(w))
        known[tid] = e
        by_size[cls].setdefault(e.size, []).append(e)
        return e

    for cls, ws in seeds(palette).items():
        for w in ws:
            e = add(cls, w)
            if e is not None:
                yield e
    largest = 1
    s = 2
    while s <= 2 * largest:
        if s > limits.max_size:
            raise ResourceLimit("witness size", limits.max_size)
        fresh = []
        for kind, lc, rc, oc in RULES:
            for i in range(1, s):
                for a in by_size[lc].get(i, ()):
                    for b in by_size[rc].get(s - i, ()):
                        e = add(oc, dotted_compose(kind, a.witness, b.witness))
                        if e is not None:
                            fresh.append(e)
                            yield e
        if fresh:
            largest = s
        s += 1


def closure(d: int, palette: Sequence[str] = (), engine: TheoryEngine | None = None,
            sweep_bound: int = 6, limits: Limits | None = None, eager_ops: bool = False) -> ClosureTable:
    """All realizable ``d``-theories of class K with minimal witnesses."""
    engine = engine if engine is not None else DEFAULT_ENGINE
    palette = tuple(palette)
    table = ClosureTable(d, palette, engine, sweep_bound)
    for e in grow(d, palette, engine, limits):
        table.entries[e.tid] = e
        table.order.append(e.tid)
    _sweep(table)
    if eager_ops:
        table.fill_ops()
    return table


def _sweep(table: ClosureTable) -> None:
    """Cross-check witness minimality against exhaustive enumeration up to the bound."""
    first_size: dict[int, int] = {}
    for cls in K:
        for n in range(1, table.sweep_bound + 1):
            for x in enumerate_class(cls.structure_class, n, table.palette):
                tid = table.engine.theory(x, table.d)
                if tid not in table.entries:
                    table.sweep_missing.append(x)
                    continue
                if tid not in first_size:
                    first_size[tid] = n
                e = table.entries[tid]
                if n < e.size:
                    e.witness = canonical_form(x)
    for e in table.entries.values():
        e.confirmed = e.size <= table.sweep_bound + 1


# ---------------------------------------------------------------------------
# Structural decomposition of K members

@dataclass(frozen=True)
class Seed:
    graph: AnyGraph


@dataclass(frozen=True)
class Compose:
    kind: Kind
    left: "Seed | Compose"
    right: "Seed | Compose"


def _sub(g: PFGraph, vertices: Sequence[int], dot: int | None = None, cut: Sequence[int] = ()) -> AnyGraph:
    """Induced subgraph on ``vertices``; edges leaving the set or from ``cut`` are dropped."""
    verts = sorted(vertices)
    index = {v: i for i, v in enumerate(verts)}
    parent = tuple(-1 if (g.parent[v] not in index or v in cut) else index[g.parent[v]] for v in verts)
    colors = tuple(frozenset(index[v] for v in cs if v in index) for cs in g.colors)
    h = PFGraph(len(verts), parent, g.palette, colors)
    return DottedPFGraph(h, index[dot]) if dot is not None else h


def _subtree(g: PFGraph, root: int, skip: frozenset = frozenset()) -> list[int]:
    out, stack = [], [root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(c for c in g.children[v] if c not in skip)
    return out


def _single(g: PFGraph, v: int, loop: bool, dotted: bool) -> AnyGraph:
    cols = [c for c, cs in zip(g.palette, g.colors) if v in cs]
    s = singleton(g.palette, cols, loop)
    return DottedPFGraph(s, 0) if dotted else s


def decompose(x: AnyGraph) -> Seed | Compose:
    """A composition term over singleton K-structures that rebuilds ``x``."""
    cls = k_class(x)
    if cls is None:
        raise GraphError("not a member of class K")
    g = undot(x)
    if g.n == 1:
        return Seed(x)
    comps = components(g)
    if cls is K.DFOREST:
        a = x.dot
        home = next(c for c in comps if a in c)
        rest = [v for c in comps if c is not home for v in c]
        if rest:
            return Compose(Kind.SUM_RIGHT_DOT, decompose(_sub(g, rest)), decompose(_sub(g, home, a)))
        root = next(v for v in home if g.parent[v] == -1)
        if a == root:
            # (singleton a) ∔ children forest
            below = [v for v in home if v != root]
            return Compose(Kind.DOT_PLUS_UNDOTTED, Seed(_single(g, root, False, True)),
                           decompose(_sub(g, below)))
        child = a
        while g.parent[child] != root:
            child = g.parent[child]
        branch = _subtree(g, child)
        others = [v for v in home if v not in set(branch)]
        return Compose(Kind.DOTTED_DOT, decompose(_sub(g, branch, a)), decompose(_sub(g, others, root)))
    if len(comps) > 1:
        return Compose(Kind.SUM, decompose(_sub(g, comps[0])),
                       decompose(_sub(g, [v for c in comps[1:] for v in c])))
    if cls is K.FOREST:
        root = next(v for v in range(g.n) if g.parent[v] == -1)
        below = [v for v in range(g.n) if v != root]
        return Compose(Kind.DOT_INTO, decompose(_sub(g, below)), Seed(_single(g, root, False, True)))
    # connected function graph
    ring = cycle_of(g, range(g.n))
    if len(ring) == 1:
        c0 = ring[0]
        below = [v for v in range(g.n) if v != c0]
        return Compose(Kind.DOT_INTO, decompose(_sub(g, below)), Seed(_single(g, c0, True, True)))
    # ring[i] -> ring[i+1]; cut c0 -> c1 for Z and c_{m-1} -> c0 for Y
    c0, c1, last = ring[0], ring[1], ring[-1]
    on_ring = frozenset(ring)
    z = _subtree(g, c0, on_ring)
    y = [v for v in range(g.n) if v not in set(z)]
    return Compose(Kind.CIRCULAR, decompose(_sub(g, y, c1, cut=[last])), decompose(_sub(g, z, c0, cut=[c0])))


def recompose(term: Seed | Compose) -> AnyGraph:
    if isinstance(term, Seed):
        return term.graph
    return dotted_compose(term.kind, recompose(term.left), recompose(term.right))


# ---------------------------------------------------------------------------
# Well-definedness checks

def _shift(mask: int, offset: int) -> int:
    return mask << offset


def composite_sets(kind: Kind, left: AnyGraph, right: AnyGraph,
                   lsets: Sequence[int], rsets: Sequence[int]) -> tuple[AnyGraph, list[int]]:
    """Compose and carry parameter sets across.

    The composite places the left operand first, except for
    DOT_PLUS_UNDOTTED, which places the right operand first.
    """
    out = dotted_compose(kind, left, right)
    if kind is Kind.DOT_PLUS_UNDOTTED:
        off = undot(right).n
        return out, [r | _shift(l, off) for l, r in zip(lsets, rsets)]
    off = undot(left).n
    return out, [l | _shift(r, off) for l, r in zip(lsets, rsets)]


@dataclass
class Violation:
    kind: Kind
    left: tuple[AnyGraph, tuple[int, ...]]
    left2: tuple[AnyGraph, tuple[int, ...]]
    right: tuple[AnyGraph, tuple[int, ...]]
    right2: tuple[AnyGraph, tuple[int, ...]]


def operands(kind: Kind, n_max: int, palette: Sequence[str] = ()) -> tuple[list[AnyGraph], list[AnyGraph]]:
    """All non-isomorphic operands of the right shapes with at most ``n_max`` vertices."""
    ldot, rdot, _ = kind.shapes

    def pool(dotted):
        out = []
        for n in range(1, n_max + 1):
            for g in enumerate_class(StructureClass.GENERAL, n, palette):
                if dotted:
                    seen = set()
                    for v in range(g.n):
                        dg = DottedPFGraph(g, v)
                        key = canon(dg)
                        if key not in seen:
                            seen.add(key)
                            out.append(dg)
                else:
                    out.append(g)
        return out

    return pool(ldot), pool(rdot)


def exhaustive_violations(kind: Kind, d: int, n_max: int, engine: TheoryEngine | None = None,
                          palette: Sequence[str] = (), arity: int = 0, limit: int = 1) -> list[Violation]:
    """Search all operand pairs (with all ``arity``-tuples of parameter sets)
    for a failure of "equal part theories give equal composite theories"."""
    engine = engine if engine is not None else DEFAULT_ENGINE
    lefts, rights = operands(kind, n_max, palette)

    def classes(xs):
        groups: dict[int, list] = {}
        for x in xs:
            n = undot(x).n
            for sets in itertools.product(range(1 << n), repeat=arity):
                groups.setdefault(engine.theory(x, d, list(sets)), []).append((x, sets))
        return list(groups.values())

    lgroups, rgroups = classes(lefts), classes(rights)
    found = []
    # composite theory is a function of the pair of classes: compare every
    # member against the first member of each class
    for lg in lgroups:
        for rg in rgroups:
            base = None
            for (lx, ls), (rx, rs) in itertools.chain(
                    ((lg[0], r) for r in rg), ((l, rg[0]) for l in lg[1:])):
                comp, sets = composite_sets(kind, lx, rx, ls, rs)
                tid = engine.theory(comp, d, sets)
                if base is None:
                    base = (tid, (lx, ls), (rx, rs))
                elif tid != base[0]:
                    found.append(Violation(kind, base[1], (lx, ls), base[2], (rx, rs)))
                    if len(found) >= limit:
                        return found
    return found


def random_violations(kind: Kind, d: int, n_max: int, samples: int, seed: int,
                      engine: TheoryEngine | None = None, palette: Sequence[str] = ()) -> tuple[int, list[Violation]]:
    """Random tuples ``(X, X', Y, Y')`` with equal part theories.

    ``X'`` is drawn from the operands sharing the theory of ``X``, so every
    sample is a genuine test.  Returns (tested, violations).
    """
    engine = engine if engine is not None else DEFAULT_ENGINE
    rng = random.Random(seed)
    lefts, rights = operands(kind, n_max, palette)

    def groups(xs):
        out: dict[int, list] = {}
        for x in xs:
            out.setdefault(engine.theory(x, d), []).append(x)
        return out

    lg, rg = groups(lefts), groups(rights)
    bad = []
    for _ in range(samples):
        x = rng.choice(lefts)
        y = rng.choice(rights)
        x2 = rng.choice(lg[engine.theory(x, d)])
        y2 = rng.choice(rg[engine.theory(y, d)])
        a = engine.theory(dotted_compose(kind, x, y), d)
        b = engine.theory(dotted_compose(kind, x2, y2), d)
        if a != b:
            bad.append(Violation(kind, (x, ()), (x2, ()), (y, ()), (y2, ())))
    return samples, bad


def attachment_counterexample() -> tuple[tuple[PFGraph, tuple[int, int]], tuple[PFGraph, tuple[int, int]]]:
    """Two forests with two parameter sets that only differ in whether ``x`` is an orphan.

    ``X1 = {x -> z, w}`` and ``X2 = {x, z, w}``; the parameters are ``({}, {x})``.
    Attaching a root ``r`` with parameters ``({r}, {})`` decides ``E(x, r)``.
    """
    x1 = PFGraph.build(3, [(0, 1)])
    x2 = PFGraph.build(3, [])
    return (x1, (0, 0b001)), (x2, (0, 0b001))


def root_attachment_violation(engine: TheoryEngine) -> bool:
    """Does root attachment break well-definedness for ``engine`` on the
    two-parameter configuration?"""
    (x1, s1), (x2, s2) = attachment_counterexample()
    root = DottedPFGraph(singleton(), 0)
    rsets = (1, 0)
    if engine.theory(x1, 0, list(s1)) != engine.theory(x2, 0, list(s2)):
        return False
    c1, t1 = composite_sets(Kind.DOT_INTO, x1, root, s1, rsets)
    c2, t2 = composite_sets(Kind.DOT_INTO, x2, root, s2, rsets)
    return engine.theory(c1, 0, t1) != engine.theory(c2, 0, t2)


__all__ = [
    "K", "RULES", "seeds", "k_class", "Entry", "ClosureTable", "Limits", "theory_op", "grow",
    "closure", "Seed", "Compose", "decompose", "recompose", "composite_sets", "Violation",
    "operands", "exhaustive_violations", "random_violations", "attachment_counterexample",
    "root_attachment_violation",
]
