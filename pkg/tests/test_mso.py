import pytest

from pfspec.mso import ParseError, depth, eliminate_functions, evaluate, parse, to_text
from pfspec.pfgraph import cycle, singleton


def test_parse_examples():
    assert depth(parse("forall x. E(x,x)")) == 1
    assert depth(parse("Exists A. forall x. x in A")) == 2
    with pytest.raises(ParseError):
        parse("exists x.")
    with pytest.raises(ParseError):
        parse("forall x. E(f(x), x)")
    with pytest.raises(ParseError):
        parse("E(x,y)")


def test_depth_of_atoms():
    assert depth(parse("OrphanEmpty")) == 0


def test_elimination_examples():
    chi = eliminate_functions(parse("forall x. f(x) = x"))
    assert to_text(chi) == "(forall x. E(x,x)) & OrphanEmpty"
    chi = eliminate_functions(parse("f(f(x)) = f(y)", free=("x", "y")))
    assert depth(chi) == 2
    for g in (cycle(2), cycle(3), singleton(loop=True)):
        for x in range(g.n):
            for y in range(g.n):
                env = {"x": x, "y": y}
                want = g.parent[g.parent[x]] == g.parent[y]
                assert evaluate(chi, g, env) == want


def test_eval_examples():
    assert evaluate(parse("forall x. exists y. E(y,x)"), cycle(3))
    assert not evaluate(parse("OrphanEmpty"), singleton())
    two_col = parse("Exists A. forall x. forall y. (E(x,y) -> (x in A <-> ~(y in A)))")
    assert evaluate(two_col, cycle(2))
    assert not evaluate(two_col, cycle(3))


def test_print_parse_round_trip():
    for text in ["forall x. f(f(x)) = x & ~ f(x) = x",
                 "Exists A. (exists x. x in A) & (forall x. x in A -> f(x) = x)",
                 "forall x. red(f(x)) <-> ~ red(x)",
                 "exists x y. ~ x = y & (E(x,y) | Orphan(x))"]:
        phi = parse(text)
        assert parse(to_text(phi)) == phi
