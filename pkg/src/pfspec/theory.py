"""MSO d-theories of PF-graphs, computed over the Boolean associate.

The Boolean associate is never built.  Its elements are vertex sets, and an
atomic formula over ``j`` of them is decided by the *cell summary* of the
tuple: for each of the ``2**j`` cells (Boolean combinations of the sets)
whether it is empty, a singleton or larger, the unary profile of singleton
cells, and the edge relation between singleton cells.  A dotted graph is
handled by treating the dot as an extra leading parameter set.

A d-theory with ``j`` parameters is the set of (d-1)-theories obtained by
adding one more set in every possible way; depth 0 is the cell summary.
Theories are interned so that equality is identifier equality.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .enumeration import canon
from .mso import ast as A
from .mso.evaluate import evaluate
from .pfgraph import AnyGraph, DottedPFGraph, PFGraph, undot

EMPTY, SINGLETON, MANY = 0, 1, 2
STATUS_NAMES = ("EMPTY", "SINGLETON", "MANY")


class ResourceLimit(RuntimeError):
    def __init__(self, what: str, limit: int):
        self.limit = limit
        super().__init__(f"{what} exceeds the ceiling {limit}")


class TheoryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Atomic types

@dataclass(frozen=True)
class AtomicType:
    """Cell summary of a parameter tuple.

    ``statuses[k]`` is EMPTY/SINGLETON/MANY for cell ``k`` (bit ``i`` of ``k``
    is membership in parameter ``i``; the dot, if any, is parameter 0).
    ``profiles[k]`` is ``-1`` unless the cell is a singleton, else bit 0 is the
    orphan flag and bit ``1+c`` is palette color ``c``.  ``edges[k*ncells+l]``
    is ``-1`` unless both cells are singletons, else whether E holds between
    them.  ``orphan_empty`` is the nullary atom ``OrphanEmpty`` (``None`` when
    orphans are not tracked).
    """

    arity: int
    dotted: bool
    orphan_empty: bool | None
    statuses: tuple[int, ...]
    profiles: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def ncells(self) -> int:
        return len(self.statuses)

    def key(self) -> tuple:
        return (self.dotted, self.arity, self.orphan_empty, self.statuses, self.profiles, self.edges)

    def describe(self, palette: Sequence[str] = ()) -> dict:
        cells = []
        for k, st in enumerate(self.statuses):
            entry = {"cell": k, "status": STATUS_NAMES[st]}
            if st == SINGLETON:
                prof = self.profiles[k]
                entry["orphan"] = bool(prof & 1)
                entry["colors"] = [c for i, c in enumerate(palette) if prof >> (i + 1) & 1]
                entry["edges_to"] = [l for l in range(self.ncells) if self.edges[k * self.ncells + l] == 1]
            cells.append(entry)
        return {"arity": self.arity, "dotted": self.dotted, "orphan_empty": self.orphan_empty, "cells": cells}


def _params(x: AnyGraph, sets: Sequence[int]) -> list[int]:
    sets = [s if isinstance(s, int) else sum(1 << v for v in s) for s in sets]
    if isinstance(x, DottedPFGraph):
        return [1 << x.dot] + sets
    return sets


def atomic_type(x: AnyGraph, sets: Sequence = (), track_orphans: bool = True) -> AtomicType:
    """Cell summary of ``sets`` (bitmasks or vertex iterables) in ``x``."""
    g = undot(x)
    params = _params(x, sets)
    for p in params:
        if p >> g.n:
            raise TheoryError("parameter set mentions a vertex outside the graph")
    j = len(params)
    ncells = 1 << j
    members: list[list[int]] = [[] for _ in range(ncells)]
    for v in range(g.n):
        k = 0
        for i, p in enumerate(params):
            if p >> v & 1:
                k |= 1 << i
        members[k].append(v)
    statuses = tuple(min(len(m), 2) for m in members)
    profiles = []
    for k, m in enumerate(members):
        if len(m) != 1:
            profiles.append(-1)
            continue
        v = m[0]
        prof = 1 if (track_orphans and g.parent[v] == -1) else 0
        for c, cs in enumerate(g.colors):
            if v in cs:
                prof |= 1 << (c + 1)
        profiles.append(prof)
    edges = []
    for k in range(ncells):
        for l in range(ncells):
            if statuses[k] == SINGLETON and statuses[l] == SINGLETON:
                edges.append(int(g.parent[members[k][0]] == members[l][0]))
            else:
                edges.append(-1)
    orphan_empty = (not g.orphans) if track_orphans else None
    arity = j - (1 if isinstance(x, DottedPFGraph) else 0)
    return AtomicType(arity, isinstance(x, DottedPFGraph), orphan_empty, statuses, tuple(profiles), tuple(edges))


# ---------------------------------------------------------------------------
# Vectorized leaf level

class _Arrays:
    __slots__ = ("n", "full", "popcount", "lowbit", "profile", "parent", "orphan_empty", "subsets")

    def __init__(self, g: PFGraph, track_orphans: bool):
        n = g.n
        self.n = n
        self.full = (1 << n) - 1
        idx = np.arange(1 << n, dtype=np.int64)
        pc = np.zeros(1 << n, dtype=np.int8)
        for v in range(n):
            pc += ((idx >> v) & 1).astype(np.int8)
        self.popcount = pc
        low = np.full(1 << n, -1, dtype=np.int16)
        for v in range(n - 1, -1, -1):
            low[(idx >> v) & 1 == 1] = v
        self.lowbit = low
        prof = np.zeros(n, dtype=np.int16)
        for v in range(n):
            p = 1 if (track_orphans and g.parent[v] == -1) else 0
            for c, cs in enumerate(g.colors):
                if v in cs:
                    p |= 1 << (c + 1)
            prof[v] = p
        self.profile = prof
        self.parent = np.array(g.parent, dtype=np.int16)
        self.orphan_empty = (not g.orphans) if track_orphans else None
        self.subsets = idx


@lru_cache(maxsize=8192)
def _arrays(g: PFGraph, track_orphans: bool) -> _Arrays:
    return _Arrays(g, track_orphans)


def _summary_rows(arr: _Arrays, params: Sequence[int], news: Sequence[np.ndarray]) -> np.ndarray:
    """Cell summaries of ``params + [S_1, ..., S_k]`` for every index into the
    equal-length arrays ``news``, one flat row each."""
    jp = len(params)
    k = len(news)
    full = arr.full
    qs = []
    for c in range(1 << jp):
        q = full
        for i, p in enumerate(params):
            q &= p if c >> i & 1 else ~p
        qs.append(q & full)
    ncells = 1 << (jp + k)
    statuses, profiles, verts, singles = [], [], [], []
    for cell in range(ncells):
        m = np.full(len(news[0]), qs[cell & ((1 << jp) - 1)], dtype=np.int64)
        for i, sv in enumerate(news):
            m &= sv if cell >> (jp + i) & 1 else full ^ sv
        cnt = arr.popcount[m]
        single = cnt == 1
        v = np.where(single, arr.lowbit[m], -1)
        statuses.append(np.minimum(cnt, 2).astype(np.int16))
        profiles.append(np.where(single, arr.profile[np.maximum(v, 0)], -1).astype(np.int16))
        verts.append(v)
        singles.append(single)
    edges = []
    for a in range(ncells):
        par = arr.parent[np.maximum(verts[a], 0)]
        for b in range(ncells):
            both = singles[a] & singles[b]
            edges.append(np.where(both, (par == verts[b]).astype(np.int16), -1).astype(np.int16))
    return np.stack(statuses + profiles + edges, axis=1)


def _dense_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Like ``np.unique(rows, axis=0, return_index=True, return_inverse=True)``
    but by folding columns into exact int64 ranks, which sorts much faster."""
    key = np.zeros(len(rows), dtype=np.int64)
    span = 1
    for col in rows.T:
        lo = int(col.min())
        width = int(col.max()) - lo + 1
        if span * width >= 1 << 62:
            _, key = np.unique(key, return_inverse=True)
            key = key.reshape(-1).astype(np.int64)
            span = int(key.max()) + 1
        key = key * width + (col.astype(np.int64) - lo)
        span *= width
    _, first, inverse = np.unique(key, return_index=True, return_inverse=True)
    return first, inverse.reshape(-1)


# rows per vectorized block at depth 2
_BLOCK = 1 << 16


# ---------------------------------------------------------------------------
# Interned theories

@dataclass(frozen=True)
class TheoryInfo:
    depth: int
    arity: int
    dotted: bool
    palette: tuple[str, ...]
    payload: object  # AtomicType at depth 0, frozenset of ids otherwise


class TheoryEngine:
    """Intern table plus memoized theory computation.

    ``track_orphans=False`` drops every orphan fact from atomic types; it only
    exists for the ablation experiment and must never be mixed with the
    default engine.
    """

    def __init__(self, track_orphans: bool = True, max_subsets: int = 1 << 16,
                 max_leaves: int = 1 << 24):
        self.track_orphans = track_orphans
        self.max_subsets = max_subsets
        self.max_leaves = max_leaves
        self._ids: dict[tuple, int] = {}
        self._info: list[TheoryInfo] = []
        self._memo: dict[tuple, int] = {}
        self._witness: dict[int, AnyGraph] = {}
        self._digest: dict[int, str] = {}
        self._lock = threading.Lock()

    # -- interning
    def _intern(self, key: tuple, info_factory) -> int:
        tid = self._ids.get(key)
        if tid is not None:
            return tid
        with self._lock:
            tid = self._ids.get(key)
            if tid is None:
                tid = len(self._info)
                self._info.append(info_factory())
                self._ids[key] = tid
        return tid

    def info(self, tid: int) -> TheoryInfo:
        return self._info[tid]

    def __len__(self):
        return len(self._info)

    def intern_atomic(self, at: AtomicType, palette: tuple[str, ...]) -> int:
        key = ("atom", palette) + at.key()
        return self._intern(key, lambda: TheoryInfo(0, at.arity, at.dotted, palette, at))

    def _intern_row(self, row: list[int], arity: int, dotted: bool, orphan_empty, palette) -> int:
        ncells = 1 << (arity + dotted)
        st = tuple(row[:ncells])
        pr = tuple(row[ncells:2 * ncells])
        ed = tuple(row[2 * ncells:])
        return self.intern_atomic(AtomicType(arity, dotted, orphan_empty, st, pr, ed), palette)

    def intern_set(self, children: Iterable[int], depth: int, arity: int, dotted: bool, palette) -> int:
        kids = frozenset(children)
        key = ("set", palette, dotted, arity, depth, tuple(sorted(kids)))
        return self._intern(key, lambda: TheoryInfo(depth, arity, dotted, palette, kids))

    # -- computation
    def atomic_id(self, x: AnyGraph, sets: Sequence = ()) -> int:
        at = atomic_type(x, sets, self.track_orphans)
        return self.intern_atomic(at, undot(x).palette)

    def theory(self, x: AnyGraph, d: int, sets: Sequence = ()) -> int:
        """Interned ``Th^d(x, sets)``."""
        if d < 0:
            raise TheoryError("depth must be nonnegative")
        g = undot(x)
        sets = [s if isinstance(s, int) else sum(1 << v for v in s) for s in sets]
        if d > 0 and (1 << g.n) > self.max_subsets:
            raise ResourceLimit(f"2^{g.n} subsets per quantifier level", self.max_subsets)
        if d > 0 and (1 << (g.n * d)) > self.max_leaves:
            raise ResourceLimit(f"2^{g.n * d} leaf tuples", self.max_leaves)
        tid = self._theory(x, d, sets)
        if not sets:
            self._note_witness(tid, x)
        return tid

    def _theory(self, x: AnyGraph, d: int, sets: list[int], memo: bool = True) -> int:
        if d == 0:
            return self.atomic_id(x, sets)
        key = (canon(x, sets), d, self.track_orphans) if memo else None
        if memo:
            tid = self._memo.get(key)
            if tid is not None:
                return tid
        g = undot(x)
        dotted = isinstance(x, DottedPFGraph)
        if d == 1:
            arr = _arrays(g, self.track_orphans)
            rows = _summary_rows(arr, _params(x, sets), [arr.subsets])
            rows = rows[_dense_rows(rows)[0]].tolist()
            kids = [self._intern_row(r, len(sets) + 1, dotted, arr.orphan_empty, g.palette) for r in rows]
        elif d == 2:
            kids = self._depth_two_children(x, sets)
        else:
            kids = {self._theory(x, d - 1, sets + [a], memo=False) for a in range(1 << g.n)}
        tid = self.intern_set(kids, d, len(sets), dotted, g.palette)
        if memo:
            self._memo[key] = tid
        return tid

    def _depth_two_children(self, x: AnyGraph, sets: list[int]) -> set[int]:
        """The depth-1 theories of ``(x, sets, A)`` for all ``A``, in vectorized blocks."""
        g = undot(x)
        dotted = isinstance(x, DottedPFGraph)
        arr = _arrays(g, self.track_orphans)
        params = _params(x, sets)
        size = 1 << g.n
        per_block = max(1, _BLOCK // size)
        out = set()
        for start in range(0, size, per_block):
            a_vals = np.arange(start, min(size, start + per_block), dtype=np.int64)
            a_col = np.repeat(a_vals, size)
            b_col = np.tile(arr.subsets, len(a_vals))
            rows = _summary_rows(arr, params, [a_col, b_col])
            first, inverse = _dense_rows(rows)
            leaf = np.array([self._intern_row(r, len(sets) + 2, dotted, arr.orphan_empty, g.palette)
                             for r in rows[first].tolist()], dtype=np.int64)
            ids = leaf[inverse].reshape(len(a_vals), size)
            ids.sort(axis=1)
            seen_rows = {}
            for row in ids:
                kids = frozenset(row.tolist())
                tid = seen_rows.get(kids)
                if tid is None:
                    tid = self.intern_set(kids, 1, len(sets) + 1, dotted, g.palette)
                    seen_rows[kids] = tid
                out.add(tid)
        return out

    def _note_witness(self, tid: int, x: AnyGraph):
        old = self._witness.get(tid)
        if old is None or undot(x).n < undot(old).n:
            self._witness[tid] = x

    def register_witness(self, x: AnyGraph, d: int) -> int:
        return self.theory(x, d)

    def witness(self, tid: int) -> AnyGraph | None:
        return self._witness.get(tid)

    def equal(self, x: AnyGraph, y: AnyGraph, d: int) -> bool:
        return self.theory(x, d) == self.theory(y, d)

    # -- stable names
    def digest(self, tid: int) -> str:
        """Hex digest of the payload, independent of interning order."""
        got = self._digest.get(tid)
        if got is not None:
            return got
        info = self._info[tid]
        h = hashlib.sha256()
        h.update(repr((info.depth, info.arity, info.dotted, info.palette)).encode())
        if info.depth == 0:
            h.update(repr(info.payload.key()).encode())
        else:
            for child in sorted(self.digest(c) for c in info.payload):
                h.update(child.encode())
        out = h.hexdigest()
        self._digest[tid] = out
        return out

    def subtheories(self, tids: Iterable[int]) -> set[int]:
        """All ids reachable through payload membership, including ``tids``."""
        out = set()
        stack = list(tids)
        while stack:
            t = stack.pop()
            if t in out:
                continue
            out.add(t)
            info = self._info[t]
            if info.depth > 0:
                stack.extend(info.payload)
        return out


DEFAULT_ENGINE = TheoryEngine()


def theory(x: AnyGraph, d: int, sets: Sequence = (), engine: TheoryEngine | None = None) -> int:
    return (engine if engine is not None else DEFAULT_ENGINE).theory(x, d, sets)


# ---------------------------------------------------------------------------
# Ehrenfeucht-Fraisse games on Boolean associates

class _Side:
    def __init__(self, x: AnyGraph, track_orphans: bool):
        self.x = x
        self.n = undot(x).n
        self.track = track_orphans
        self._cache: dict[tuple, AtomicType] = {}

    def atom(self, sets: tuple) -> AtomicType:
        at = self._cache.get(sets)
        if at is None:
            at = atomic_type(self.x, sets, self.track)
            self._cache[sets] = at
        return at


def ef_equal(x: AnyGraph, y: AnyGraph, d: int, track_orphans: bool = True,
             max_positions: int = 1 << 26) -> bool:
    """Does the duplicator win the ``d``-round game on the Boolean associates?

    Moves are arbitrary vertex sets.  This is a direct game-tree search that
    shares nothing with :meth:`TheoryEngine.theory` beyond the atomic types.
    """
    gx, gy = undot(x), undot(y)
    if gx.palette != gy.palette:
        raise TheoryError("palettes differ")
    if isinstance(x, DottedPFGraph) != isinstance(y, DottedPFGraph):
        raise TheoryError("one structure is dotted and the other is not")
    if (1 << (max(gx.n, gy.n) * 2 * d)) > max_positions:
        raise ResourceLimit("game tree size", max_positions)
    sx, sy = _Side(x, track_orphans), _Side(y, track_orphans)
    memo: dict[tuple, bool] = {}

    def duplicator_wins(xs: tuple, ys: tuple, rounds: int) -> bool:
        if sx.atom(xs).key() != sy.atom(ys).key():
            return False
        if rounds == 0:
            return True
        key = (xs, ys)
        got = memo.get(key)
        if got is not None:
            return got
        ok = all(any(duplicator_wins(xs + (a,), ys + (b,), rounds - 1) for b in range(1 << sy.n))
                 for a in range(1 << sx.n))
        ok = ok and all(any(duplicator_wins(xs + (a,), ys + (b,), rounds - 1) for a in range(1 << sx.n))
                        for b in range(1 << sy.n))
        memo[key] = ok
        return ok

    return duplicator_wins((), (), d)


# ---------------------------------------------------------------------------
# Using theories

def decide_sentence(tid: int, phi: A.Formula, engine: TheoryEngine | None = None) -> bool:
    """Truth of a sentence in every structure whose theory is ``tid``."""
    engine = engine if engine is not None else DEFAULT_ENGINE
    info = engine.info(tid)
    if info.arity != 0:
        raise TheoryError("sentences are decided by theories without parameters")
    if A.depth(phi) > info.depth:
        raise TheoryError(f"formula depth {A.depth(phi)} exceeds theory depth {info.depth}")
    if A.free_vars(phi):
        raise TheoryError("not a sentence")
    w = engine.witness(tid)
    if w is None:
        raise TheoryError(f"no witness stored for theory {tid}")
    return evaluate(phi, w)


def _set_var(i: int) -> str:
    return f"X{i + 1}"


def _atomic_formula(at: AtomicType, palette: Sequence[str], names: Sequence[str]) -> A.Formula:
    parts: list[A.Formula] = []

    def cell(k: int) -> A.Cell:
        return tuple((names[i], bool(k >> i & 1)) for i in range(len(names)))

    for k, st in enumerate(at.statuses):
        c = cell(k)
        if st == EMPTY:
            parts.append(A.CellZero(c))
        elif st == SINGLETON:
            parts.append(A.CellAtomic(c))
            prof = at.profiles[k]
            orphan = A.CellOrphan(c)
            parts.append(orphan if prof & 1 else A.Not(orphan))
            for i, name in enumerate(palette):
                col = A.CellColor(name, c)
                parts.append(col if prof >> (i + 1) & 1 else A.Not(col))
        else:
            parts.append(A.Not(A.CellZero(c)))
            parts.append(A.Not(A.CellAtomic(c)))
    n = at.ncells
    for k in range(n):
        for l in range(n):
            e = at.edges[k * n + l]
            if e >= 0:
                atom = A.CellEdge(cell(k), cell(l))
                parts.append(atom if e else A.Not(atom))
    if at.orphan_empty is not None:
        parts.append(A.OrphanEmpty() if at.orphan_empty else A.Not(A.OrphanEmpty()))
    return A.conj(parts)


def epsilon_formula(tid: int, realized: Iterable[int], engine: TheoryEngine | None = None) -> A.Formula:
    """Hintikka sentence of ``tid`` relative to the theories in ``realized``.

    Members of the theory are asserted to exist; realized non-members of the
    right depth and arity are asserted not to.  The formula has the depth of
    the theory.
    """
    engine = engine if engine is not None else DEFAULT_ENGINE
    info = engine.info(tid)
    if info.dotted:
        raise TheoryError("Hintikka formulas are only emitted for undotted theories")
    realized = set(realized)

    def build(t: int) -> A.Formula:
        inf = engine.info(t)
        names = [_set_var(i) for i in range(inf.arity)]
        if inf.depth == 0:
            return _atomic_formula(inf.payload, inf.palette, names)
        new = _set_var(inf.arity)
        others = sorted(s for s in realized
                        if s not in inf.payload and engine.info(s).depth == inf.depth - 1
                        and engine.info(s).arity == inf.arity + 1 and not engine.info(s).dotted
                        and engine.info(s).palette == inf.palette)
        parts = [A.Exists(new, build(s)) for s in sorted(inf.payload)]
        parts += [A.Not(A.Exists(new, build(s))) for s in others]
        return A.conj(parts)

    return build(tid)


def type_space_bound(d: int, j: int = 0, palette_size: int = 0, max_exponent: int = 1 << 24) -> int:
    """Number of syntactically possible ``d``-theories with ``j`` parameters.

    Depth 0 counts all cell summaries (consistent or not); each further level
    is a powerset.  Raises ``OverflowError`` once an exponent exceeds
    ``max_exponent``.
    """
    if d == 0:
        cells = 1 << j
        profiles = 1 << (palette_size + 1)
        total = 0
        for k in range(cells + 1):
            total += comb(cells, k) * (1 << (cells - k)) * profiles ** k * (1 << (k * k))
        return 2 * total
    inner = type_space_bound(d - 1, j + 1, palette_size, max_exponent)
    if inner > max_exponent:
        raise OverflowError(f"bound for depth {d} is 2^N with N of {inner.bit_length()} bits, too large to materialize")
    return 1 << inner


def enumerate_realized(graphs: Iterable[AnyGraph], d: int, engine: TheoryEngine | None = None) -> set[int]:
    engine = engine if engine is not None else DEFAULT_ENGINE
    return {engine.theory(x, d) for x in graphs}


__all__ = [
    "AtomicType", "atomic_type", "TheoryEngine", "DEFAULT_ENGINE", "theory", "ef_equal",
    "decide_sentence", "epsilon_formula", "type_space_bound", "ResourceLimit", "TheoryError",
]
