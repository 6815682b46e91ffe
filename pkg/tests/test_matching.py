"""Associative matching, narrowing, and word-equation refutation."""

import itertools
import random
import time

from superfcm.matching import (
    NoSolution,
    Solutions,
    Unknown,
    check_equations,
    match_all,
    match_first,
    match_rigid,
    narrow_match,
    prove_unsolvable,
)
from superfcm.syntax import parse_term
from superfcm.terms import Char, Subst, Var, apply, items, seq, variables

import oracles


def _as_dict(s):
    return {v: t for v, t in s.items()}


def test_leftmost_shortest_pair_example():
    # two matches exist; the leftmost-shortest one binds e.x to 'a'
    pats = [parse_term("e.x:e.w:e.y"), parse_term("e.w")]
    vals = [parse_term("'abcabc'"), parse_term("'bc'")]
    first = match_first(pats, vals)
    assert first is not None
    assert apply(first, pats[0]) == vals[0]
    got = {("%s.%s" % (v.kind, v.name)): t for v, t in first.items()}
    assert got["e.x"] == parse_term("'a'")
    assert got["e.w"] == parse_term("'bc'")
    assert got["e.y"] == parse_term("'abc'")
    both = match_all(pats, vals)
    assert len(both) == 2
    second = {("%s.%s" % (v.kind, v.name)): t for v, t in both[1].items()}
    assert second["e.x"] == parse_term("'abca'")
    assert second["e.y"] == parse_term("''")


def test_leftmost_shortest_three_way_example():
    pats = [parse_term("e.x:'a':e.y:'a':e.z")]
    vals = [parse_term("'abacad'")]
    first = match_first(pats, vals)
    got = {("%s.%s" % (v.kind, v.name)): t for v, t in first.items()}
    assert got["e.x"] == parse_term("''")
    assert got["e.y"] == parse_term("'b'")
    assert got["e.z"] == parse_term("'cad'")
    assert len(match_all(pats, vals)) == 3


def test_brute_force_oracle_agreement():
    rng = random.Random(99)
    t0 = time.monotonic()
    checked = 0
    with_solutions = 0
    for _ in range(1000):
        names = itertools.count()
        k = rng.choice((1, 1, 2))
        pats = [oracles.random_pattern(rng, "abc", names) for _ in range(k)]
        vals = []
        budget = 8
        for _ in range(k):
            t = oracles.random_object_term(rng, "abc", min(budget, 5))
            budget -= len(list(items(t)))
            vals.append(t)
        want = oracles.all_matches(pats, vals)
        got = match_all(pats, vals)
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert _as_dict(g) == w
        first = match_first(pats, vals)
        if want:
            with_solutions += 1
            assert first is not None and _as_dict(first) == want[0]
        else:
            assert first is None
        checked += 1
    assert checked == 1000 and with_solutions > 100
    assert time.monotonic() - t0 < 30


def test_match_rigid_treats_value_variables_as_atoms():
    pat = [parse_term("e.x:'a'")]
    got = match_rigid(pat, [parse_term("e.q:'a'")])
    assert got is not None and _as_dict(got) == {
        Var("e", "x"): Var("e", "q")
    }
    assert match_rigid(pat, [parse_term("e.q")]) is None
    assert match_rigid([parse_term("s.x")], [parse_term("e.q")]) is None


def test_narrow_match_branches_cover_exactly_the_matching_instances():
    rng = random.Random(5)
    for _ in range(250):
        names = itertools.count()
        config = [oracles.random_pattern(rng, "ab", names)]
        pats = [oracles.random_pattern(rng, "ab", names)]
        out = narrow_match(tuple(config), tuple(pats))
        if isinstance(out, Unknown):
            continue
        for _ in range(40):
            ground = Subst(
                {
                    v: _ground_value(rng, v)
                    for v in variables(config[0])
                },
                validate=False,
            )
            inst = apply(ground, config[0])
            really = bool(oracles.all_matches(pats, [inst]))
            covered = False
            if isinstance(out, Solutions):
                for br in out.branches:
                    narrowed = apply(br.narrowing, config[0])
                    if match_first([narrowed], [inst]) is not None:
                        covered = True
                        break
            if really:
                assert covered, (config, pats, inst)
            if isinstance(out, NoSolution):
                assert not really


def _ground_value(rng, v):
    if v.kind == "s":
        return Char(rng.choice("ab"))
    if v.kind == "t":
        return Char(rng.choice("ab"))
    return oracles.random_word(rng, "ab", 3)


def test_narrow_match_bindings_restate_the_narrowed_problem():
    out = narrow_match(
        (parse_term("'a':e.q"),), (parse_term("'a':'b':e.w"),)
    )
    assert isinstance(out, Solutions)
    for br in out.branches:
        narrowed = apply(br.narrowing, parse_term("'a':e.q"))
        again = apply(br.binding, parse_term("'a':'b':e.w"))
        assert again == narrowed


def test_check_equations_refutes_by_letter_counts():
    eq = (parse_term("'a':e.x"), parse_term("e.x:'b'"))
    out = check_equations([eq], ("a", "b"))
    assert isinstance(out, NoSolution)
    assert out.certificate is not None


def test_check_equations_refutes_by_instantiation():
    lhs = parse_term("'a':e.q:'a':e.q:'b'")
    rhs = parse_term("e.q:'a':e.q:'b':e.q")
    t0 = time.monotonic()
    out = check_equations([(lhs, rhs)], ("a", "b"))
    took = time.monotonic() - t0
    assert isinstance(out, NoSolution)
    assert took < 0.5


def test_check_equations_leaves_solvable_systems_alone():
    out = check_equations(
        [(parse_term("e.x:'a'"), parse_term("'ba'"))], ("a", "b")
    )
    assert not isinstance(out, NoSolution)


def test_prove_unsolvable_finds_a_model():
    lhs = parse_term("'a':e.q:'a':e.q:'b'")
    rhs = parse_term("e.q:'a':e.q:'b':e.q")
    got = prove_unsolvable([(lhs, rhs)], ("a", "b"), model_budget=None)
    assert isinstance(got, NoSolution)
