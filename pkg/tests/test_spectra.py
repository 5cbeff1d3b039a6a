import json

import pytest

from pfspec.algebra import K, Limits
from pfspec.enumeration import enumerate_upto
from pfspec.mso import evaluate, parse
from pfspec.pfgraph import PFGraph, StructureClass, cycle, load, to_json
from pfspec.spectra import (NotApplicable, SpectrumCertificate, Status, Thresholds, check_certificate,
                            minimal_threshold, period_certificate, period_of, pump, satisfiable,
                            sentence_certificate, spectrum_prefix, theories_of)
from pfspec.theory import TheoryEngine, TheoryError

FG = StructureClass.FUNCTION_GRAPH


def test_theories_of(table1):
    fg = set(table1.ids(K.FG))
    assert theories_of(parse("OrphanEmpty"), table1) == fg
    assert theories_of(parse("~ OrphanEmpty"), table1) == set()
    loops = theories_of(parse("exists x. E(x,x)"), table1)
    assert loops == {t for t in fg if any(p == v for v, p in enumerate(table1.entries[t].witness.parent))}
    with pytest.raises(TheoryError):
        theories_of(parse("Exists A. forall x. x in A"), table1)


@pytest.mark.parametrize("text,status,size", [
    ("forall x. f(x)=x", Status.SAT, 1),
    ("(forall x. f(x)=x) & (exists x. ~ f(x)=x)", Status.UNSAT, None),
    ("forall x. (~ f(x)=x) & f(f(x))=x", Status.SAT, 2),
])
def test_satisfiable_examples(text, status, size):
    v = satisfiable(parse(text), TheoryEngine())
    assert v.status is status
    if size is not None:
        assert v.witness.n == size and evaluate(parse(text), v.witness)
    if "f(f(x))" in text:
        assert v.witness.parent == (1, 0)


def test_satisfiable_reads_tables(table1):
    v = satisfiable(parse("exists x. ~ E(x,x)"), table=table1)
    assert v.status is Status.SAT and v.witness.n == 2
    assert satisfiable(parse("exists x. ~ x = x"), table=table1).status is Status.UNSAT


def test_satisfiable_resource_limit():
    v = satisfiable(parse("exists x. ~ x = x"), TheoryEngine(), Limits(max_size=2))
    assert v.status is Status.RESOURCE_LIMIT and "2" in v.detail


def test_spectrum_examples():
    assert spectrum_prefix(parse("forall x. f(x)=x"), 6) == [False] + [True] * 6
    star = parse("exists y. forall x. E(x,y)")
    assert spectrum_prefix(star, 7) == [False] + [True] * 7
    for n in range(1, 7):
        g = PFGraph(n, (0,) * n)
        assert evaluate(star, g)
    inv = parse("forall x. (~ f(x)=x) & f(f(x))=x")
    assert spectrum_prefix(inv, 6, path="theory", engine=TheoryEngine()) == spectrum_prefix(inv, 6)


def test_spectrum_of_theory_matches_enumeration(engine):
    x = cycle(2)
    t = engine.theory(x, 1)
    want = [False] + [any(engine.theory(y, 1) == t for y in enumerate_upto(FG, n) if y.n == n)
                      for n in range(1, 7)]
    assert spectrum_prefix(t, 6, engine=engine) == want


def test_check_certificate_examples():
    evens = [n > 0 and n % 2 == 0 for n in range(11)]
    assert check_certificate(SpectrumCertificate(0, 2, 0, evens))
    two_three = [n in (2, 3) for n in range(9)]
    assert not check_certificate(SpectrumCertificate(0, 2, 0, two_three))
    with pytest.raises(ValueError):
        check_certificate(SpectrumCertificate(0, 6, 5, evens))
    assert minimal_threshold(two_three, 2) == 4


def test_certificates_d0(table0, engine, schema):
    p = period_of(table0)
    assert p == 6
    sizes = {table0.entries[t].size for c in (K.FG, K.DFOREST, K.DSFG) for t in table0.ids(c)}
    assert all(p % s == 0 for s in sizes)
    certs = period_certificate(table0, 12, engine)
    for cert in certs.values():
        assert cert.p == p and check_certificate(cert)
        schema("certificate.json", cert.to_json())
    identity = engine.theory(PFGraph(1, (0,)), 0)
    assert certs[identity].prefix[1]
    cert = sentence_certificate(parse("forall x. f(x)=x"), 12, p)
    assert cert.theta <= 1 and check_certificate(cert)


def test_pump_case1_example(table0, engine):
    x = PFGraph(3, (0, 1, 2))
    r = pump(x, table0, Thresholds(2, 2, 2, 2))
    assert r.case == 1 and r.graph.n == 3 + 6
    assert engine.theory(r.graph, 0) == engine.theory(x, 0)


def test_pump_not_applicable(table0):
    with pytest.raises(NotApplicable):
        pump(cycle(2), table0, Thresholds(2, 2, 2, 2))


def test_pump_exhaustive_small(table0, engine):
    cases = set()
    for x in enumerate_upto(FG, 6):
        try:
            r = pump(x, table0, Thresholds(2, 2, 2, 2))
        except NotApplicable:
            continue
        cases.add(r.case)
        assert r.graph.n == x.n + 6
        assert r.graph.is_function_graph()
        assert engine.theory(r.graph, 0) == engine.theory(x, 0)
    assert cases == {1, 2, 3, 4}


def test_default_thresholds_from_table(table0):
    th = Thresholds.from_table(table0)
    assert th == Thresholds(len(table0.ids(K.FG)), len(table0.ids(K.FOREST)),
                            len(table0.ids(K.DFOREST)), len(table0.ids(K.FOREST)))
    assert Thresholds.parse("case1=5, case3=1", th) == Thresholds(5, th.case2, 1, th.case4)
    with pytest.raises(ValueError):
        Thresholds.parse("case9=1", th)
    assert th.bound() == th.case1 * th.case3 * (1 + sum(th.case2 ** k for k in range(1, th.case4 + 1)))
