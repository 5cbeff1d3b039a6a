"""Finite satisfiability, spectra, periodicity certificates and pumping.

Sentences are decided over function graphs.  A sentence with the function
symbol is first translated into the PF-graph vocabulary; a sentence of depth
``d`` is true in a function graph iff that graph's ``d``-theory is one of the
finitely many theories the sentence accepts, so satisfiability reduces to a
search over the closure of realizable theories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

from .algebra import K, ClosureTable, Limits, grow
from .enumeration import canon, enumerate_class
from .mso import ast as A
from .mso.evaluate import evaluate
from .mso.translate import eliminate_functions
from .pfgraph import (AnyGraph, DottedPFGraph, GraphError, Kind, PFGraph, StructureClass,
                      components, cycle_of, disjoint, dotted_compose, undot)
from .theory import DEFAULT_ENGINE, ResourceLimit, TheoryEngine, TheoryError, decide_sentence


def as_graph_sentence(phi: A.Formula) -> A.Formula:
    """The PF-graph form of ``phi``; formulas without graph vocabulary are translated."""
    if A.free_vars(phi):
        raise TheoryError("not a sentence")
    if A.uses_graph_vocabulary(phi):
        return phi
    return eliminate_functions(phi)


def palette_of(phi: A.Formula, palette: Sequence[str] | None = None) -> tuple[str, ...]:
    used = A.colors_used(phi)
    if palette is None:
        return tuple(sorted(used))
    missing = used - set(palette)
    if missing:
        raise TheoryError(f"colors {sorted(missing)} are not in the palette")
    return tuple(palette)


# ---------------------------------------------------------------------------
# Satisfiability

class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    RESOURCE_LIMIT = "RESOURCE_LIMIT"


@dataclass
class Verdict:
    status: Status
    depth: int
    palette: tuple[str, ...]
    witness: AnyGraph | None = None
    detail: str = ""

    def __bool__(self):
        return self.status is Status.SAT


def theories_of(phi: A.Formula, table: ClosureTable) -> set[int]:
    """Function-graph theories in ``table`` whose structures satisfy ``phi``."""
    chi = as_graph_sentence(phi)
    if A.depth(chi) > table.d:
        raise TheoryError(f"sentence depth {A.depth(chi)} exceeds table depth {table.d}")
    palette_of(chi, table.palette)
    return {t for t in table.ids(K.FG) if evaluate(chi, table.min_witness(t)[0])}


def satisfiable(phi: A.Formula, engine: TheoryEngine | None = None, limits: Limits | None = None,
                table: ClosureTable | None = None, palette: Sequence[str] | None = None) -> Verdict:
    """Decide whether some finite function graph satisfies ``phi``.

    With a ``table`` of sufficient depth the answer is read off the table.
    Otherwise the closure is grown in order of witness size and stops at the
    first function-graph theory that satisfies the sentence, so a SAT witness
    has minimum size.  UNSAT needs the whole fixpoint.
    """
    engine = engine if engine is not None else DEFAULT_ENGINE
    chi = as_graph_sentence(phi)
    d = A.depth(chi)
    pal = palette_of(chi, palette)
    if table is not None and table.d >= d and table.palette == pal:
        hits = sorted(theories_of(chi, table), key=lambda t: (table.entries[t].size, table.order.index(t)))
        if hits:
            w = table.min_witness(hits[0])[0]
            return Verdict(Status.SAT, d, pal, w)
        return Verdict(Status.UNSAT, d, pal)
    try:
        for e in grow(d, pal, engine, limits):
            if e.cls is K.FG and evaluate(chi, e.witness):
                return Verdict(Status.SAT, d, pal, e.witness)
    except ResourceLimit as exc:
        return Verdict(Status.RESOURCE_LIMIT, d, pal, detail=str(exc))
    return Verdict(Status.UNSAT, d, pal)


# ---------------------------------------------------------------------------
# Spectra

def function_graphs(n: int, palette: Sequence[str] = ()):
    return enumerate_class(StructureClass.FUNCTION_GRAPH, n, palette)


def spectrum_prefix(target: A.Formula | int, N: int, path: str = "eval",
                    engine: TheoryEngine | None = None, palette: Sequence[str] | None = None,
                    d: int | None = None) -> list[bool]:
    """Membership of ``0..N`` in the spectrum over function graphs.

    ``target`` is a sentence or a theory id.  The ``eval`` path evaluates the
    sentence on every function graph; the ``theory`` path computes theories
    and decides the sentence on each theory's smallest witness.  Index 0 is
    always False since structures are nonempty.
    """
    engine = engine if engine is not None else DEFAULT_ENGINE
    out = [False] * (N + 1)
    if isinstance(target, int):
        info = engine.info(target)
        if info.dotted or info.arity:
            raise TheoryError("spectra are defined for undotted theories without parameters")
        for n in range(1, N + 1):
            out[n] = any(engine.theory(x, info.depth) == target for x in function_graphs(n, info.palette))
        return out
    chi = as_graph_sentence(target)
    pal = palette_of(chi, palette)
    if path == "eval":
        for n in range(1, N + 1):
            out[n] = any(evaluate(chi, x) for x in function_graphs(n, pal))
        return out
    if path != "theory":
        raise ValueError(f"unknown path {path!r}")
    depth = A.depth(chi) if d is None else d
    if depth < A.depth(chi):
        raise TheoryError("theory depth below sentence depth")
    verdict: dict[int, bool] = {}
    for n in range(1, N + 1):
        for x in function_graphs(n, pal):
            t = engine.theory(x, depth)
            if t not in verdict:
                verdict[t] = decide_sentence(t, chi, engine)
            if verdict[t]:
                out[n] = True
                break
    return out


def spectrum_all(phi: A.Formula, N: int, tag: StructureClass = StructureClass.GENERAL,
                 palette: Sequence[str] | None = None) -> list[bool]:
    """Spectrum over an arbitrary structure class, by direct evaluation."""
    pal = palette_of(phi, palette)
    out = [False] * (N + 1)
    for n in range(1, N + 1):
        out[n] = any(evaluate(phi, x) for x in enumerate_class(tag, n, pal))
    return out


def spectrum_all_theories(d: int, N: int, palette: Sequence[str] = (),
                          engine: TheoryEngine | None = None) -> dict[int, list[bool]]:
    """Spectra of every function-graph ``d``-theory realized up to size ``N``."""
    engine = engine if engine is not None else DEFAULT_ENGINE
    out: dict[int, list[bool]] = {}
    for n in range(1, N + 1):
        for x in function_graphs(n, palette):
            t = engine.theory(x, d)
            out.setdefault(t, [False] * (N + 1))[n] = True
    return out


# ---------------------------------------------------------------------------
# Certificates

@dataclass
class SpectrumCertificate:
    d: int
    p: int
    theta: int
    prefix: list[bool]
    flags: list[str] = field(default_factory=list)
    theory: str | None = None
    sentence: str | None = None
    theta_bound: int | None = None

    def to_json(self) -> dict:
        out = {"d": self.d, "p": self.p, "theta": self.theta, "prefix": list(self.prefix),
               "flags": list(self.flags)}
        if self.theory is not None:
            out["theory"] = self.theory
        if self.sentence is not None:
            out["sentence"] = self.sentence
        if self.theta_bound is not None:
            out["theta_bound"] = str(self.theta_bound)
        return out


def check_certificate(cert: SpectrumCertificate) -> bool:
    """``n in S  =>  n + p in S`` for ``theta <= n <= N - p`` on the prefix."""
    N = len(cert.prefix) - 1
    if cert.p <= 0:
        raise ValueError("period must be positive")
    if N < cert.theta + cert.p:
        raise ValueError(f"horizon {N} is shorter than theta + p = {cert.theta + cert.p}")
    return all(cert.prefix[n + cert.p] for n in range(max(cert.theta, 0), N - cert.p + 1) if cert.prefix[n])


def minimal_threshold(prefix: Sequence[bool], p: int) -> int:
    """Least ``theta`` for which the periodicity implication holds on ``prefix``."""
    N = len(prefix) - 1
    worst = -1
    for n in range(N - p + 1):
        if prefix[n] and not prefix[n + p]:
            worst = n
    return worst + 1


def period_of(table: ClosureTable) -> int:
    """lcm of the minimal witness sizes of function-graph and dotted theories."""
    sizes = {table.entries[t].size for c in (K.FG, K.DFOREST, K.DSFG) for t in table.ids(c)}
    return reduce(math.lcm, sizes, 1)


@dataclass(frozen=True)
class Thresholds:
    """Case triggers for pumping: more than ``caseN`` items of the relevant kind."""
    case1: int
    case2: int
    case3: int
    case4: int

    @classmethod
    def from_table(cls, table: ClosureTable) -> "Thresholds":
        # exact counts of realizable theories; dotted trees and trees are
        # counted through the dotted forest and forest classes containing them
        return cls(len(table.ids(K.FG)), len(table.ids(K.FOREST)),
                   len(table.ids(K.DFOREST)), len(table.ids(K.FOREST)))

    @classmethod
    def parse(cls, text: str, default: "Thresholds") -> "Thresholds":
        vals = {"case1": default.case1, "case2": default.case2, "case3": default.case3, "case4": default.case4}
        for part in filter(None, (s.strip() for s in text.split(","))):
            key, _, val = part.partition("=")
            if key not in vals:
                raise ValueError(f"unknown threshold {key!r}")
            vals[key] = int(val)
        return cls(**vals)

    def bound(self) -> int:
        """Size bound for function graphs that trigger no case."""
        c2, c4 = self.case2, self.case4
        below = sum(c2 ** k for k in range(1, c4 + 1))
        return self.case1 * self.case3 * (1 + below)


def period_certificate(table: ClosureTable, N: int, engine: TheoryEngine | None = None,
                       spectra: Mapping[int, list[bool]] | None = None) -> dict[int, SpectrumCertificate]:
    """One certificate per function-graph theory of the table."""
    engine = engine if engine is not None else DEFAULT_ENGINE
    p = period_of(table)
    if spectra is None:
        spectra = spectrum_all_theories(table.d, N, table.palette, engine)
    flags = ["minima_confirmed" if table.all_confirmed else "minima_unconfirmed",
             "dotted_theories_from_class_K"]
    bound = Thresholds.from_table(table).bound()
    out = {}
    for t in table.ids(K.FG):
        prefix = list(spectra.get(t, [False] * (N + 1)))
        theta = minimal_threshold(prefix, p)
        out[t] = SpectrumCertificate(table.d, p, theta, prefix, list(flags),
                                     theory=engine.digest(t), theta_bound=bound + 1)
    return out


def sentence_certificate(phi: A.Formula, N: int, p: int, d: int | None = None) -> SpectrumCertificate:
    prefix = spectrum_prefix(phi, N)
    chi = as_graph_sentence(phi)
    return SpectrumCertificate(A.depth(chi) if d is None else d, p, minimal_threshold(prefix, p),
                               prefix, sentence=str(phi))


# ---------------------------------------------------------------------------
# Pumping

class NotApplicable(Exception):
    """No pumping case applies under the given thresholds."""


@dataclass
class PumpResult:
    case: int
    graph: PFGraph
    p: int
    detail: dict = field(default_factory=dict)


def _sub(g: PFGraph, vertices: Iterable[int], dot: int | None = None) -> AnyGraph:
    verts = sorted(vertices)
    index = {v: i for i, v in enumerate(verts)}
    parent = tuple(index.get(g.parent[v], -1) if g.parent[v] != -1 else -1 for v in verts)
    colors = tuple(frozenset(index[v] for v in cs if v in index) for cs in g.colors)
    h = PFGraph(len(verts), parent, g.palette, colors)
    return DottedPFGraph(h, index[dot]) if dot is not None else h


def _order(g: PFGraph, parts: list[list[int]]) -> list[list[int]]:
    return sorted(parts, key=lambda vs: (canon(_sub(g, vs)), vs))


def _first_repeat(ids: Sequence[int]) -> tuple[int, int] | None:
    """Least ``j`` with an earlier ``i`` such that ``ids[i] == ids[j]`` (0-based)."""
    seen: dict[int, int] = {}
    for j, t in enumerate(ids):
        if t in seen:
            return seen[t], j
        seen[t] = j
    return None


def _copies(kind: Kind, w: AnyGraph, k: int) -> AnyGraph:
    out = w
    for _ in range(k - 1):
        out = dotted_compose(kind, out, w)
    return out


class Pumper:
    """Size-``p`` pumping of function graphs that keeps the ``d``-theory."""

    def __init__(self, table: ClosureTable, thresholds: Thresholds | None = None, p: int | None = None):
        self.table = table
        self.engine = table.engine
        self.d = table.d
        self.p = p if p is not None else period_of(table)
        self.th = thresholds if thresholds is not None else Thresholds.from_table(table)

    def theory(self, x: AnyGraph) -> int:
        return self.engine.theory(x, self.d)

    def _witness(self, tid: int) -> tuple[AnyGraph, int]:
        w, size = self.table.min_witness(tid)
        if self.p % size:
            raise TheoryError(f"witness size {size} does not divide the period {self.p}")
        return w, size

    def pump(self, x: PFGraph) -> PumpResult:
        if isinstance(x, DottedPFGraph) or not x.is_function_graph():
            raise GraphError("pumping applies to function graphs")
        for case in (self.case1, self.case2, self.case3, self.case4):
            got = case(x)
            if got is not None:
                return got
        raise NotApplicable("no case applies")

    # Case 1: many components, a repeated prefix-sum theory
    def case1(self, x: PFGraph) -> PumpResult | None:
        comps = _order(x, components(x))
        if len(comps) <= self.th.case1:
            return None
        parts = [_sub(x, c) for c in comps]
        prefix_ids = []
        acc = None
        for part in parts:
            acc = part if acc is None else dotted_compose(Kind.SUM, acc, part)
            prefix_ids.append(self.theory(acc))
        rep = _first_repeat(prefix_ids)
        if rep is None:
            return None
        i, j = rep
        u = self.theory(disjoint(parts[i + 1:j + 1]))
        z, pu = self._witness(u)
        k = self.p // pu
        y = disjoint(parts[:j + 1] + [z] * k + parts[j + 1:])
        return PumpResult(1, y, self.p, {"i": i + 1, "j": j + 1, "copies": k})

    # Case 2: a vertex with many noncyclic children
    def case2(self, x: PFGraph) -> PumpResult | None:
        cyc = x.cyclic
        for a in range(x.n):
            kids = [c for c in x.children[a] if c not in cyc]
            if len(kids) <= self.th.case2:
                continue
            trees = _order(x, [_descendants(x, c) for c in kids])
            parts = [_sub(x, t) for t in trees]
            prefix_ids = []
            acc = None
            for part in parts:
                acc = part if acc is None else dotted_compose(Kind.SUM, acc, part)
                prefix_ids.append(self.theory(acc))
            rep = _first_repeat(prefix_ids)
            if rep is None:
                continue
            i, j = rep
            u = self.theory(disjoint(parts[i + 1:j + 1]))
            z, pu = self._witness(u)
            k = self.p // pu
            g = disjoint(parts[:j + 1] + [z] * k + parts[j + 1:])
            removed = {v for t in trees for v in t}
            q = _sub(x, [v for v in range(x.n) if v not in removed], a)
            y = dotted_compose(Kind.DOT_INTO, g, q)
            return PumpResult(2, y, self.p, {"a": a, "i": i + 1, "j": j + 1, "copies": k})
        return None

    # Case 3: a long cycle, a repeated dotted-tree theory along it
    def case3(self, x: PFGraph) -> PumpResult | None:
        done = set()
        for v in sorted(x.cyclic):
            if v in done:
                continue
            comp = next(c for c in components(x) if v in c)
            ring = cycle_of(x, comp)
            done.update(ring)
            m = len(ring)
            if m <= self.th.case3:
                continue
            on_ring = frozenset(ring)
            trees = [_descendants(x, a, on_ring) for a in ring]
            # (X_i, a_0) for i = 1..m-1; X_m would leave nothing for V
            ids = []
            for i in range(1, m):
                verts = [w for t in trees[:i] for w in t]
                ids.append(self.theory(_cut(x, verts, ring[0], ring[i - 1])))
            rep = _first_repeat(ids)
            if rep is None:
                continue
            i, j = rep[0] + 1, rep[1] + 1
            u_verts = [w for t in trees[i:j] for w in t]
            u = self.theory(_cut(x, u_verts, ring[i], ring[j - 1]))
            z1, qu = self._witness(u)
            z = _copies(Kind.DOTTED_DOT, z1, self.p // qu)
            xj_verts = [w for t in trees[:j] for w in t]
            xj = _cut(x, xj_verts, ring[0], ring[j - 1])
            rest = set(xj_verts)
            # V keeps every other component of X as well
            v_part = _cut(x, [w for w in range(x.n) if w not in rest], ring[j], ring[-1])
            y = dotted_compose(Kind.CIRCULAR, dotted_compose(Kind.DOTTED_DOT, xj, z), v_part)
            return PumpResult(3, y, self.p, {"cycle": m, "i": i, "j": j, "copies": self.p // qu})
        return None

    # Case 4: a long noncyclic path, a repeated tree theory along it
    def case4(self, x: PFGraph) -> PumpResult | None:
        path = _longest_noncyclic_path(x)
        m = len(path)
        if m <= self.th.case4:
            return None
        trees = []
        for k, a in enumerate(path):
            skip = frozenset([path[k - 1]]) if k else frozenset()
            trees.append(_descendants(x, a, skip))
        ids = []
        for i in range(1, m):
            verts = [w for t in trees[:i] for w in t]
            ids.append(self.theory(_cut(x, verts, None, path[i - 1])))
        rep = _first_repeat(ids)
        if rep is None:
            return None
        i, j = rep[0] + 1, rep[1] + 1
        u = self.theory(_cut(x, [w for t in trees[i:j] for w in t], path[i], path[j - 1]))
        z1, qu = self._witness(u)
        z = _copies(Kind.DOTTED_DOT, z1, self.p // qu)
        xj_verts = [w for t in trees[:j] for w in t]
        xj = _cut(x, xj_verts, None, path[j - 1])
        rest = set(xj_verts)
        v_part = _sub(x, [w for w in range(x.n) if w not in rest], path[j])
        y = dotted_compose(Kind.DOT_INTO, dotted_compose(Kind.DOT_INTO, xj, z), v_part)
        return PumpResult(4, y, self.p, {"path": m, "i": i, "j": j, "copies": self.p // qu})


def _descendants(g: PFGraph, root: int, skip: frozenset = frozenset()) -> list[int]:
    out, stack = [], [root]
    cyc = g.cyclic
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(c for c in g.children[v] if c not in skip and c not in cyc)
    return out


def _cut(g: PFGraph, verts: Sequence[int], dot: int | None, top: int) -> AnyGraph:
    """Induced subgraph with the edge out of ``top`` removed."""
    verts = sorted(verts)
    index = {v: i for i, v in enumerate(verts)}
    parent = tuple(-1 if v == top or g.parent[v] not in index else index[g.parent[v]] for v in verts)
    colors = tuple(frozenset(index[v] for v in cs if v in index) for cs in g.colors)
    h = PFGraph(len(verts), parent, g.palette, colors)
    return DottedPFGraph(h, index[dot]) if dot is not None else h


def _longest_noncyclic_path(g: PFGraph) -> list[int]:
    """The longest chain ``a_0 -> a_1 -> ...`` of noncyclic vertices, leaf first."""
    cyc = g.cyclic
    best: list[int] = []
    for leaf in range(g.n):
        if leaf in cyc or any(c not in cyc for c in g.children[leaf]):
            continue
        chain = []
        v = leaf
        while v != -1 and v not in cyc:
            chain.append(v)
            v = g.parent[v]
        if len(chain) > len(best) or (len(chain) == len(best) and chain < best):
            best = chain
    return best


def pump(x: PFGraph, table: ClosureTable, thresholds: Thresholds | None = None,
         p: int | None = None) -> PumpResult:
    return Pumper(table, thresholds, p).pump(x)


__all__ = [
    "Status", "Verdict", "satisfiable", "theories_of", "spectrum_prefix", "spectrum_all",
    "spectrum_all_theories", "SpectrumCertificate", "check_certificate", "minimal_threshold",
    "period_of", "period_certificate", "sentence_certificate", "Thresholds", "Pumper", "pump",
    "PumpResult", "NotApplicable", "as_graph_sentence", "palette_of",
]
