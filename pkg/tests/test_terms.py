"""Term structure: sequences, substitutions, instance checks."""

import itertools
import random

import pytest

from superfcm.terms import (
    Call,
    Char,
    EMPTY,
    Paren,
    SortViolation,
    Subst,
    Var,
    apply,
    compose,
    instance_of,
    is_object,
    is_passive,
    items,
    seq,
    variables,
)

import oracles


def test_seq_flattens_and_drops_the_unit():
    a, b = Char("a"), Char("b")
    t = seq([a, seq([b, EMPTY]), EMPTY])
    assert list(items(t)) == [a, b]
    assert seq([]) == EMPTY
    assert seq([a]) == a


def test_items_of_single_items():
    for t in (Char("a"), Paren(EMPTY), Var("e", "x")):
        assert list(items(t)) == [t]
    assert list(items(EMPTY)) == []


def test_concatenation_is_associative_in_the_representation():
    a, b, c = Char("a"), Char("b"), Char("c")
    assert seq([seq([a, b]), c]) == seq([a, seq([b, c])])


def test_is_object_and_is_passive():
    ground = seq([Char("a"), Paren(Char("b"))])
    withvar = seq([Char("a"), Var("e", "x")])
    call = Call("f", (Char("a"),))
    assert is_object(ground) and is_passive(ground)
    assert not is_object(withvar) and is_passive(withvar)
    assert not is_object(call) and not is_passive(call)


def test_subst_sorts():
    ab = seq([Char("a"), Char("b")])
    with pytest.raises(SortViolation):
        Subst({Var("s", "x"): ab})
    with pytest.raises(SortViolation):
        Subst({Var("t", "x"): ab})
    with pytest.raises(SortViolation):
        Subst({Var("s", "x"): Paren(Char("a"))})
    # t accepts any single item, e accepts any passive term
    Subst({Var("t", "x"): Paren(ab), Var("e", "y"): ab})


def test_apply_replaces_variables():
    x = Var("e", "x")
    s = Subst({x: seq([Char("a"), Char("b")])})
    t = seq([Char("c"), x, Paren(x)])
    got = apply(s, t)
    assert got == seq(
        [Char("c"), Char("a"), Char("b"), Paren(seq([Char("a"), Char("b")]))]
    )


def test_apply_compose_agrees_with_sequential_application():
    rng = random.Random(7)
    names = itertools.count()
    for _ in range(300):
        t = oracles.random_pattern(rng, "ab", names)
        vs = list(variables(t))
        s1 = Subst(
            {
                v: _value_for(rng, v)
                for v in vs
                if rng.random() < 0.7
            },
            validate=False,
        )
        mid = apply(s1, t)
        s2 = Subst(
            {
                v: _value_for(rng, v)
                for v in variables(mid)
            },
            validate=False,
        )
        assert apply(s2, mid) == apply(compose(s1, s2), t)


def _value_for(rng, v):
    if v.kind == "s":
        return Char(rng.choice("ab"))
    if v.kind == "t":
        if rng.random() < 0.5:
            return Char(rng.choice("ab"))
        return Paren(oracles.random_word(rng, "ab", 2))
    return oracles.random_word(rng, "ab", 3)


def test_instance_of_finds_a_witness():
    rng = random.Random(11)
    names = itertools.count()
    hits = 0
    for _ in range(300):
        pat = oracles.random_pattern(rng, "ab", names)
        s = Subst({v: _value_for(rng, v) for v in variables(pat)}, validate=False)
        inst = apply(s, pat)
        got = instance_of(inst, pat)
        assert got is not None
        assert apply(got, pat) == inst
        hits += 1
    assert hits == 300


def test_instance_of_rejects_non_instances():
    a = Char("a")
    assert instance_of(a, Char("b")) is None
    assert instance_of(seq([a, a]), seq([Var("s", "x"), Var("s", "x")])) is not None
    assert (
        instance_of(seq([a, Char("b")]), seq([Var("s", "x"), Var("s", "x")])) is None
    )
    assert instance_of(Paren(a), Var("s", "x")) is None


def test_variables_in_occurrence_order():
    t = seq([Var("e", "b"), Char("a"), Var("s", "a"), Var("e", "b")])
    assert list(variables(t)) == [Var("e", "b"), Var("s", "a")]
