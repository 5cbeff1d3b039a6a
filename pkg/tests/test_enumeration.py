from pfspec.enumeration import (automorphism_count, canon, canonical_form, canonical_key,
                                enumerate_class, labeled_quotient)
from pfspec.pfgraph import DottedPFGraph, PFGraph, StructureClass, cycle, singleton, sum_graphs

FG = StructureClass.FUNCTION_GRAPH


def test_canonical_key_examples():
    a = PFGraph(3, (1, 2, 0))
    b = PFGraph(3, (1, 2, 0)).relabel([2, 0, 1])
    assert canonical_key(a) == canonical_key(b)
    assert canonical_key(cycle(3)) != canonical_key(sum_graphs(cycle(2), singleton(loop=True)))
    red = singleton(("red",), ["red"])
    assert canonical_key(red) != canonical_key(singleton(("red",)))


def test_dot_is_part_of_the_key():
    p = PFGraph(2, (1, -1))
    assert canon(DottedPFGraph(p, 0)) != canon(DottedPFGraph(p, 1))


def test_small_counts():
    assert [len(list(enumerate_class(FG, n))) for n in (1, 2, 3)] == [1, 3, 7]
    assert [len(list(enumerate_class(StructureClass.FOREST, n))) for n in (1, 2, 3)] == [1, 2, 4]
    assert len(list(enumerate_class(FG, 1, ("red",)))) == 2
    assert len(labeled_quotient(FG, 2, ("red",))) == len(list(enumerate_class(FG, 2, ("red",))))


def test_enumeration_is_deterministic_and_canonical():
    a = list(enumerate_class(FG, 5))
    assert a == list(enumerate_class(FG, 5))
    assert len({canon(x) for x in a}) == len(a)
    for x in a:
        assert canonical_form(x) == x or canon(canonical_form(x)) == canon(x)


def test_automorphisms():
    assert automorphism_count(cycle(4)) == 4
    assert automorphism_count(sum_graphs(singleton(), singleton())) == 2
