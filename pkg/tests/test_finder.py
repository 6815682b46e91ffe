"""Finite model search: budgets, validation, automaton view."""

import random
import time

import pytest

from superfcm import corpus, fol
from superfcm.finder import (
    FiniteModel,
    SearchBudget,
    check_model,
    find_model,
    model_to_automaton,
    model_to_text,
)
from superfcm.syntax import parse_term

import oracles


@pytest.fixture(scope="module")
def equation_refutation():
    lhs = parse_term("'a':e.q:'a':e.q:'b'")
    rhs = parse_term("e.q:'a':e.q:'b':e.q")
    th = fol.equations_goal_theory([(lhs, rhs)], ("a", "b"))
    res = find_model(th, SearchBudget(min_size=2, max_size=16, deadline=60.0))
    return th, res


def test_find_model_refutes_the_unsolvable_equation(equation_refutation):
    th, res = equation_refutation
    assert res.status == "model"
    assert res.model is not None and res.model.size <= 16
    assert check_model(res.model, th)


def test_find_model_gives_up_on_solvable_goals():
    th = fol.equations_goal_theory(
        [(parse_term("e.q:'a'"), parse_term("'a':e.q"))], ("a",)
    )
    res = find_model(th, SearchBudget(min_size=2, max_size=3, deadline=30.0))
    assert res.status == "exhausted"
    assert res.model is None


def test_deadline_is_respected():
    p = corpus.load("g")
    enc = fol.encode_program_overapprox(p)
    enc.theory.goal = fol.goal_for_target(enc, "g", parse_term("'A'"))
    t0 = time.monotonic()
    res = find_model(
        enc.theory, SearchBudget(min_size=2, max_size=16, deadline=1.0)
    )
    took = time.monotonic() - t0
    assert res.status == "deadline"
    assert took < 10.0


def test_model_round_trips_through_json(equation_refutation):
    th, res = equation_refutation
    blob = res.model.to_json()
    again = FiniteModel.from_json(blob)
    assert again.size == res.model.size
    assert check_model(again, th)
    assert model_to_text(again) == model_to_text(res.model)


def test_automaton_agrees_with_the_tables(equation_refutation):
    _, res = equation_refutation
    model = res.model
    pos = model_to_automaton(model, "R", positive=True)
    neg = model_to_automaton(model, "R", positive=False)
    rng = random.Random(17)
    for _ in range(500):
        t = oracles.random_object_term(rng, "ab", 6)
        el = pos.value(t)
        assert pos.accepts(t) == ((el,) in model.preds["R"])
        assert neg.accepts(t) != pos.accepts(t)


def test_model_text_mentions_every_table(equation_refutation):
    _, res = equation_refutation
    text = model_to_text(res.model)
    assert "size %d" % res.model.size in text
    assert "beta:" in text and "R:" in text
