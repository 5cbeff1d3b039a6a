import itertools
import json

import pytest

from pfspec.algebra import (RULES, K, Limits, closure, decompose, exhaustive_violations, grow,
                            k_class, recompose, theory_op)
from pfspec.enumeration import canon, dotted_versions, enumerate_upto
from pfspec.pfgraph import DottedPFGraph, Kind, StructureClass, cycle, singleton
from pfspec.theory import ResourceLimit, TheoryEngine, TheoryError

FG = StructureClass.FUNCTION_GRAPH


def test_closure_d0_contents(table0):
    sizes = {c: sorted(table0.entries[t].size for t in table0.ids(c)) for c in K}
    assert sizes[K.FG] == [1, 2]
    assert sizes[K.FOREST] == [1, 2]
    assert sizes[K.DSFG] == [1]
    assert table0.all_confirmed and not table0.sweep_missing


def test_min_witness_examples(table0, engine):
    t = engine.theory(singleton(loop=True), 0)
    assert table0.min_witness(t)[1] == 1
    c2 = engine.theory(cycle(2), 0)
    want = 1 if c2 == t else 2
    assert table0.min_witness(c2)[1] == want
    for tid in table0.ids():
        w, _ = table0.min_witness(tid)
        assert engine.theory(w, 0) == tid
    with pytest.raises(TheoryError):
        table0.min_witness(-1)


def test_closure_d1_covers_small_graphs(table1, engine):
    assert len(table1) == 63 and table1.max_witness_size() == 5
    for x in enumerate_upto(StructureClass.FOREST, 5):
        assert engine.theory(x, 1) in table1
    for x in dotted_versions(enumerate_upto(StructureClass.FOREST, 4)):
        assert engine.theory(x, 1) in table1


def test_sum_is_commutative_and_dotted_dot_associative(table0, table1):
    for t, u in itertools.product(table1.ids(K.FG), repeat=2):
        assert table1.op(Kind.SUM, t, u) == table1.op(Kind.SUM, u, t)
    ds = table0.ids(K.DFOREST)
    for t, u, v in itertools.product(ds, repeat=3):
        left = theory_op(Kind.DOTTED_DOT, table0.op(Kind.DOTTED_DOT, t, u), v, 0, table0, table0.engine)
        right = theory_op(Kind.DOTTED_DOT, t, table0.op(Kind.DOTTED_DOT, u, v), 0, table0, table0.engine)
        assert left == right


def test_operation_results_stay_in_the_table(table1):
    table1.fill_ops()
    for (kind, t, u), r in table1.ops.items():
        assert r in table1
        rule = next(rl for rl in RULES if rl[0] is kind
                    and rl[1] is table1.entries[t].cls and rl[2] is table1.entries[u].cls)
        assert table1.entries[r].cls is rule[3]


def test_theory_op_rejects_bad_shapes(table0):
    fg = table0.ids(K.FG)[0]
    with pytest.raises(TheoryError):
        table0.op(Kind.CIRCULAR, fg, fg)


def test_table_round_trip(table0, schema):
    data = json.loads(table0.dumps())
    schema("table.json", data)
    from pfspec.algebra import ClosureTable
    again = ClosureTable.from_json(data, TheoryEngine())
    assert again.dumps() == table0.dumps()
    data["theories"][0]["witness"] = data["theories"][1]["witness"]
    with pytest.raises(ValueError):
        ClosureTable.from_json(data, TheoryEngine())


def test_grow_limits():
    with pytest.raises(ResourceLimit):
        list(grow(1, (), TheoryEngine(), Limits(max_theories=10)))
    with pytest.raises(ResourceLimit):
        list(grow(1, (), TheoryEngine(), Limits(max_size=3)))


def test_decompose_recompose_exact():
    members = list(enumerate_upto(FG, 5)) + list(enumerate_upto(StructureClass.FOREST, 5))
    members += list(dotted_versions(enumerate_upto(StructureClass.FOREST, 4)))
    members.append(DottedPFGraph(singleton(loop=True), 0))
    for x in members:
        assert k_class(x) is not None
        assert canon(recompose(decompose(x))) == canon(x)


def test_well_definedness_with_parameters(engine):
    for kind in (Kind.DOT_INTO, Kind.CIRCULAR):
        assert exhaustive_violations(kind, 0, 2, engine, arity=1) == []
