"""Concrete syntax: parsing, printing, and their round trip."""

import random

import pytest

from superfcm import corpus
from superfcm.syntax import (
    ArityMismatch,
    FreeRhsVariable,
    SyntaxError,
    parse_binding,
    parse_program,
    parse_term,
    print_program,
    print_term,
)
from superfcm.terms import Call, Char, EMPTY, Paren, Var, seq

import oracles


def test_parse_term_basics():
    assert parse_term("''") == EMPTY
    assert parse_term("'ab'") == seq([Char("a"), Char("b")])
    assert parse_term("('a')") == Paren(Char("a"))
    assert parse_term("e.x:'a'") == seq([Var("e", "x"), Char("a")])
    assert parse_term("f('a', e.y)") == Call("f", (Char("a"), Var("e", "y")))


def test_quoting_round_trip():
    t = seq([Char("'"), Char("\\"), Char("a")])
    assert parse_term(print_term(t)) == t


def test_parse_binding():
    v, t = parse_binding("e.n='III'")
    assert v == Var("e", "n")
    assert t == seq([Char("I")] * 3)
    v, t = parse_binding("e.ps=")
    assert t == EMPTY
    with pytest.raises(SyntaxError):
        parse_binding("'a'='b'")


def test_corpus_round_trip():
    for name in corpus.NAMES:
        p = corpus.load(name)
        text = print_program(p)
        again = parse_program(text)
        assert again == p
        assert print_program(again) == text


def test_random_program_round_trip():
    rng = random.Random(20260822)
    for _ in range(1000):
        p = oracles.random_flat_program(rng)
        text = print_program(p)
        again = parse_program(text)
        assert print_program(again) == text
        assert again == p


def test_rule_indices_are_sequential():
    p = corpus.load("fib")
    assert [r.index for r in p.rules] == list(range(len(p.rules)))
    assert p.rules_for("F")[0].fn == "F"


def test_alphabet_collects_all_characters():
    p = parse_program("start: f('a':e.x); f(e.x) = 'bc';")
    assert p.alphabet == ("a", "b", "c")


def test_errors():
    with pytest.raises(FreeRhsVariable):
        parse_program("start: f(e.x); f(e.x) = e.y;")
    with pytest.raises(ArityMismatch):
        parse_program("start: f(e.x); f(e.x) = 'a'; f(e.x, e.y) = 'a';")
    with pytest.raises(SyntaxError):
        parse_program("start: f(e.x)")  # missing semicolon
    with pytest.raises(SyntaxError):
        parse_term("'a")
