"""Exact arithmetic on eventually periodic sets of naturals.

Internally a set is an ultimately periodic bit word: explicit membership
below ``start`` and a repeating block of length ``period`` from ``start`` on.
The public form is a finite set of sporadic elements plus arithmetic
progressions ``b, b+p, b+2p, ...``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence


class EPSetError(ValueError):
    pass


@dataclass(frozen=True)
class _Word:
    start: int
    period: int
    head: tuple[bool, ...]   # membership of 0..start-1
    block: tuple[bool, ...]  # membership of start..start+period-1, repeating

    def __contains__(self, n: int) -> bool:
        if n < 0:
            return False
        if n < self.start:
            return self.head[n]
        return self.block[(n - self.start) % self.period]

    def expand(self, horizon: int) -> list[bool]:
        return [n in self for n in range(horizon + 1)]

    @classmethod
    def from_predicate(cls, member, start: int, period: int) -> "_Word":
        return cls(start, period, tuple(member(n) for n in range(start)),
                   tuple(member(start + i) for i in range(period)))


@dataclass(frozen=True)
class EPSet:
    """``sporadic`` plus the union of progressions ``(base, period)``."""

    sporadic: tuple[int, ...] = ()
    progressions: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if any(n < 0 for n in self.sporadic):
            raise EPSetError("elements must be natural numbers")
        for b, p in self.progressions:
            if b < 0 or p <= 0:
                raise EPSetError(f"bad progression ({b}, {p})")

    # -- construction
    @classmethod
    def of(cls, sporadic: Iterable[int] = (), progressions: Iterable[Sequence[int]] = ()) -> "EPSet":
        return cls(tuple(sorted(set(sporadic))), tuple(sorted((int(b), int(p)) for b, p in progressions)))

    @classmethod
    def finite(cls, elems: Iterable[int]) -> "EPSet":
        return cls.of(elems)

    @classmethod
    def from_json(cls, data: dict) -> "EPSet":
        return cls.of(data.get("sporadic", ()), data.get("progressions", ()))

    def to_json(self) -> dict:
        return {"sporadic": list(self.sporadic), "progressions": [list(bp) for bp in self.progressions]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    # -- basic queries
    @property
    def is_finite(self) -> bool:
        return not self.progressions

    @property
    def is_empty(self) -> bool:
        return not self.sporadic and not self.progressions

    def __contains__(self, n: int) -> bool:
        if n in self.sporadic:
            return True
        return any(n >= b and (n - b) % p == 0 for b, p in self.progressions)

    def word(self) -> _Word:
        period = reduce(math.lcm, (p for _, p in self.progressions), 1)
        start = max([b for b, _ in self.progressions] + [n + 1 for n in self.sporadic], default=0)
        return _Word.from_predicate(self.__contains__, start, period)

    def expand(self, horizon: int) -> set[int]:
        w = self.word()
        return {n for n in range(horizon + 1) if n in w}

    def __str__(self):
        parts = [str(n) for n in self.sporadic]
        parts += [f"{b}+{p}N" for b, p in self.progressions]
        return "{" + ", ".join(parts) + "}"


def _from_word(w: _Word) -> EPSet:
    period = _least_block_period(w.block)
    block = w.block[:period]
    start = w.start
    # pull the periodic part as far down as it reaches
    while start > 0 and w.head[start - 1] == block[(period - 1)]:
        start -= 1
        block = block[-1:] + block[:-1]
    word = _Word.from_predicate(w.__contains__, start, period)
    if not any(word.block):
        return EPSet.of(n for n in range(start) if word.head[n])
    progressions = []
    covered = set()
    for i, bit in enumerate(word.block):
        if not bit:
            continue
        b = start + i
        while b - period >= 0 and (b - period) in word:
            b -= period
        progressions.append((b, period))
        covered.update(range(b, start + period, period))
    sporadic = [n for n in range(start) if word.head[n] and n not in covered]
    return EPSet.of(sporadic, progressions)


def _least_block_period(block: Sequence[bool]) -> int:
    """Least rotation period of a cyclic block."""
    n = len(block)
    for q in range(1, n + 1):
        if n % q == 0 and all(block[i] == block[(i + q) % n] for i in range(n)):
            return q
    return n


def normalize(s: EPSet) -> EPSet:
    """Canonical form: least period, every progression pulled down as far as
    possible, no sporadic element inside a progression."""
    return _from_word(s.word())


def is_period(s: EPSet, p: int) -> bool:
    """Is ``n in S => n + p in S`` true for all large ``n``?"""
    if p <= 0:
        return False
    w = s.word()
    return all(not w.block[i] or w.block[(i + p) % w.period] for i in range(w.period))


def least_period(s: EPSet) -> int:
    """The least period: the gcd of all periods dividing the block length.

    Any two periods have a period as gcd, so the gcd of the candidate periods
    is itself a period and divides every other.  Finite sets have period 1.
    """
    if s.is_finite:
        return 1
    w = s.word()
    candidates = [q for q in range(1, w.period + 1) if w.period % q == 0 and is_period(s, q)]
    g = reduce(math.gcd, candidates)
    assert is_period(s, g)
    return g


def threshold(s: EPSet, p: int) -> int:
    """Least ``theta`` (possibly -1) with ``n in S => n + p in S`` for all ``n > theta``."""
    if not is_period(s, p):
        raise EPSetError(f"{p} is not a period")
    w = s.word()
    worst = -1
    for n in range(w.start + w.period):
        if n in w and (n + p) not in w:
            worst = n
    return worst


def strict_threshold(s: EPSet, p: int) -> int:
    """``max{min A_i}`` over the residue classes ``A_i`` of ``S`` above the
    ``p``-threshold; from there on ``n in S <=> n + p in S``."""
    theta = threshold(s, p)
    w = s.word()
    horizon = max(w.start, theta + 1) + w.period * p + p
    mins = []
    for r in range(p):
        first = next((n for n in range(theta + 1, horizon + 1) if n % p == r and n in w), None)
        if first is not None:
            mins.append(first)
    return max(mins, default=theta + 1)


def union(sets: Sequence[EPSet]) -> EPSet:
    if not sets:
        return EPSet()
    words = [s.word() for s in sets]
    period = reduce(math.lcm, (w.period for w in words), 1)
    start = max(w.start for w in words)
    return _from_word(_Word.from_predicate(lambda n: any(n in w for w in words), start, period))


def _sum2(a: EPSet, b: EPSet) -> EPSet:
    wa, wb = a.word(), b.word()
    L = math.lcm(wa.period, wb.period)
    # beyond wa.start + wb.start + 2L every residue class mod L is constant
    start = wa.start + wb.start + 2 * L
    top = start + L
    xs = [n for n in range(top + 1) if n in wa]
    ys = [n for n in range(top + 1) if n in wb]
    hit = [False] * (top + 1)
    for x in xs:
        for y in ys:
            if x + y > top:
                break
            hit[x + y] = True
    return _from_word(_Word(start, L, tuple(hit[:start]), tuple(hit[start:start + L])))


def sumset(sets: Sequence[EPSet]) -> EPSet:
    """``{n_1 + ... + n_m : n_i in S_i}``."""
    if not sets:
        raise EPSetError("sumset of no sets")
    if any(s.is_empty for s in sets):
        raise EPSetError("sumset with an empty operand")
    return reduce(_sum2, sets[1:], normalize(sets[0]))


def from_prefix(prefix: Sequence[bool], p: int, theta: int) -> EPSet:
    """Extend a finite membership prefix periodically beyond ``theta``."""
    start = max(theta, 0)
    if len(prefix) < start + p:
        raise EPSetError("prefix too short")
    return _from_word(_Word(start, p, tuple(prefix[:start]), tuple(prefix[start:start + p])))


__all__ = [
    "EPSet", "EPSetError", "normalize", "is_period", "least_period", "threshold",
    "strict_threshold", "union", "sumset", "from_prefix",
]
