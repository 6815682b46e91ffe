"""The strict rewriting interpreter: evaluation, rule order, work counters."""

import random

from superfcm import machine
from superfcm.syntax import parse_program, parse_term, print_term
from superfcm.terms import Char, Subst, Var, seq

import oracles


def _run(text, **binds):
    p = parse_program(text)
    theta = Subst(
        {Var("e", k): parse_term(v) for k, v in binds.items()}, validate=False
    )
    return machine.eval(p, theta)


def test_first_matching_rule_wins():
    text = "start: f(e.n); f('a':e.x) = '1'; f(e.x) = '2';"
    assert _run(text, n="'ab'").term == Char("1")
    assert _run(text, n="'ba'").term == Char("2")
    assert _run(text, n="''").term == Char("2")


def test_markov_choice_is_observable_through_results():
    text = "start: f(e.n); f(e.x:'a':e.y:'a':e.z) = (e.x):(e.y):(e.z);"
    res = _run(text, n="'abacad'")
    assert print_term(res.term) == "(''):('b'):('cad')"


def test_stuck_and_fuel():
    stuck = _run("start: f(e.n); f('a') = 'a';", n="'b'")
    assert isinstance(stuck, machine.Stuck)
    assert stuck.call.fn == "f"
    p = parse_program("start: f(e.n); f(e.x) = f(e.x:'a');")
    out = machine.eval(p, Subst({Var("e", "n"): seq([])}, validate=False), fuel=25)
    assert isinstance(out, machine.FuelExhausted)
    assert out.stats.steps == 25


def test_fibonacci_pair_values():
    p = parse_program(
        "start: Fib(e.n);"
        " Fib(e.n) = F(e.n, 'b', 'a');"
        " F('', e.xs, e.ys) = (e.xs):(e.ys);"
        " F('I':e.ns, e.xs, e.ys) = F(e.ns, e.ys, e.xs:e.ys);"
    )
    words = oracles.fib_words(10)
    for n in range(9):
        theta = Subst({Var("e", "n"): seq([Char("I")] * n)}, validate=False)
        res = machine.eval(p, theta)
        assert isinstance(res, machine.Value)
        want = "('%s'):('%s')" % (words[n], words[n + 1])
        assert print_term(res.term) == want
        assert res.stats.steps == n + 2


def test_evaluation_is_deterministic():
    rng = random.Random(3)
    p = parse_program(
        "start: f(e.n);"
        " f('a':e.x) = f(e.x);"
        " f('b':e.x:'b') = (f(e.x)):'b';"
        " f(e.x) = (e.x);"
    )
    for _ in range(50):
        w = oracles.random_word(rng, "ab", 8)
        theta = Subst({Var("e", "n"): w}, validate=False)
        a = machine.eval(p, theta)
        b = machine.eval(p, theta)
        assert type(a) is type(b)
        if isinstance(a, machine.Value):
            assert a.term == b.term and a.stats == b.stats


def test_match_ops_track_repeated_variable_comparison():
    p = parse_program(
        "start: f('a':e.q:'b', e.q:'b':e.q);"
        " f(e.x, e.x) = 'T';"
        " f(e.x, e.y) = 'F';"
    )
    costs = []
    for n in (8, 64):
        theta = Subst(
            {Var("e", "q"): seq([Char("a")] * n)}, validate=False
        )
        res = machine.eval(p, theta)
        assert isinstance(res, machine.Value) and res.term == Char("F")
        assert res.stats.steps == 1
        costs.append(res.stats.match_ops)
    assert costs[1] > costs[0]


def test_nested_calls_evaluate_innermost_first():
    text = (
        "start: outer(inner(e.n));"
        " inner('a':e.x) = e.x;"
        " outer(e.y) = (e.y);"
    )
    res = _run(text, n="'ab'")
    assert isinstance(res, machine.Value)
    assert print_term(res.term) == "('b')"
