import pytest
from hypothesis import given, settings, strategies as st

from pfspec.epsets import (EPSet, EPSetError, from_prefix, is_period, least_period, normalize,
                           strict_threshold, sumset, threshold, union)

EVENS = EPSet.of([], [(0, 2)])
ODDS = EPSet.of([], [(1, 2)])


def test_least_period_examples():
    assert least_period(EVENS) == 2
    mixed = EPSet.of([], [(0, 4), (2, 4), (0, 6), (2, 6)])
    assert least_period(mixed) == 2
    assert mixed.expand(50) == EVENS.expand(50)
    assert least_period(EPSet.of([0], [(3, 2)])) == 2
    assert least_period(EPSet.of([4, 9])) == 1


def test_strict_threshold_examples():
    assert strict_threshold(EPSet.of([0], [(3, 2)]), 2) == 3
    assert strict_threshold(EVENS, 2) == 0
    s = EPSet.of([1, 2], [(10, 3)])
    assert threshold(s, 3) == 2
    assert strict_threshold(s, 3) == 10
    with pytest.raises(EPSetError):
        strict_threshold(EVENS, 3)


def test_union_examples():
    assert union([EVENS, ODDS]) == EPSet.of([], [(0, 1)])
    u = union([EVENS, EPSet.of([], [(1, 3)])])
    assert least_period(u) == 6
    assert u.expand(60) == {n for n in range(61) if n % 2 == 0 or n % 3 == 1}
    assert union([ODDS, EPSet()]) == normalize(ODDS)


def test_sumset_examples():
    assert sumset([EVENS, EVENS]) == EVENS
    assert sumset([EPSet.of([1]), EVENS]) == ODDS
    a, b = EPSet.of([], [(3, 2)]), EPSet.of([], [(4, 3)])
    assert sumset([a, b]).expand(60) == {x + y for x in a.expand(60) for y in b.expand(60) if x + y <= 60}
    with pytest.raises(EPSetError):
        sumset([EVENS, EPSet()])
    with pytest.raises(EPSetError):
        sumset([])


def test_normal_form():
    s = normalize(EPSet.of([0, 2, 5, 7], [(4, 2)]))
    assert s == EPSet.of([5, 7], [(0, 2)])
    assert normalize(EPSet.of([3, 6], [(9, 3)])) == EPSet.of([], [(3, 3)])
    with pytest.raises(EPSetError):
        EPSet.of([], [(1, 0)])


def test_json_and_prefix():
    s = EPSet.of([1], [(4, 3)])
    assert EPSet.from_json(s.to_json()) == s
    prefix = [n in s for n in range(20)]
    assert from_prefix(prefix, 3, 4) == normalize(s)


sets = st.builds(
    EPSet.of,
    st.lists(st.integers(0, 20), max_size=4),
    st.lists(st.tuples(st.integers(0, 15), st.integers(1, 6)), max_size=3),
)


@settings(max_examples=150, deadline=None)
@given(sets, sets)
def test_operations_match_expansion(a, b):
    H = 80
    ea, eb = a.expand(H), b.expand(H)
    assert normalize(a).expand(H) == ea
    assert normalize(normalize(a)) == normalize(a)
    assert union([a, b]).expand(H) == ea | eb
    if ea and eb:
        assert sumset([a, b]).expand(H) == {x + y for x in ea for y in eb if x + y <= H}


@settings(max_examples=150, deadline=None)
@given(sets)
def test_least_period_divides_periods(s):
    lp = least_period(s)
    assert is_period(s, lp)
    for q in range(1, 30):
        if is_period(s, q):
            assert q % lp == 0
