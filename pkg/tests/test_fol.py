"""First-order encodings: data theory, reachability axioms, exports."""

import pytest

from superfcm import corpus, fol
from superfcm.syntax import ArityMismatch, parse_program, parse_term
from superfcm.terms import Call, Char, Var


def test_mace4_export_of_the_data_theory():
    th = fol.encode_data_theory(("a", "b"))
    text = fol.export_mace4(th)
    assert text.startswith("formulas(assumptions).\n")
    assert "  (x * y) * z = x * (y * z).\n" in text
    assert "  x * e0 = x.\n" in text
    assert "  e0 * x = x.\n" in text
    assert "c_a" in text and "c_b" in text
    assert text.rstrip().endswith("end_of_list.")
    assert "formulas(goals)." in text


def test_mace4_export_is_deterministic():
    p = corpus.load("fib")
    enc1 = fol.encode_program_overapprox(p)
    enc2 = fol.encode_program_overapprox(p)
    assert fol.export_mace4(enc1.theory) == fol.export_mace4(enc2.theory)


def test_fib_encoding_predicates_and_step_axiom():
    p = corpus.load("fib")
    enc = fol.encode_program_overapprox(p)
    assert enc.theory.predicates == {
        "R": 1,
        "Reach_Fib": 1,
        "Reach_F": 3,
        "Out": 1,
    }
    text = fol.export_mace4(enc.theory)
    assert "(Reach_F((c_I * x), y, z)) -> (Reach_F(x, z, (y * z)))" in text


def test_outer_test_function_is_expressed_through_outputs():
    p = corpus.load("fibtest")
    enc = fol.encode_program_overapprox(p)
    assert "Reach_B" not in enc.theory.predicates
    goal = fol.goal_for_target(enc, "B", Char("F"))
    assert "Out" in fol.render_formula(goal)


def test_goal_for_target_unknown_result():
    p = corpus.load("fib")
    enc = fol.encode_program_overapprox(p)
    with pytest.raises(ValueError):
        fol.goal_for_target(enc, "F", Char("Z"))


def test_unsupported_shapes_are_rejected():
    nested = parse_program(
        "start: f(e.n); f(e.x) = g(g(e.x)); g(e.x) = 'a';"
    )
    with pytest.raises(fol.UnsupportedShape):
        fol.encode_program_overapprox(nested)


def test_one_step_goal_and_equations():
    p = corpus.load("ex5")
    rule1, rule2 = p.rules
    goal = fol.encode_one_step_goal(p.initial, rule1, p.alphabet)
    rendered = fol.render_formula(goal)
    assert "exists" in rendered and "β" in rendered
    eqs = fol.one_step_equations(p.initial, rule1)
    assert eqs is not None and len(eqs) == 1
    l, r = eqs[0]
    pair = {l, r}
    assert parse_term("'a':e.q:'a':e.q:'b'") in pair
    assert parse_term("e.q:'a':e.q:'b':e.q") in pair
    # the catch-all second rule always fires
    assert fol.one_step_equations(p.initial, rule2) is None
    with pytest.raises(ArityMismatch):
        fol.encode_one_step_goal(Call("h", (Var("e", "q"),)), rule1, p.alphabet)


def test_header_only_export_for_a_program_without_rules():
    p = parse_program("start: '';")
    th = fol.encode_data_theory(p.alphabet)
    text = fol.export_mace4(th)
    assert "R(e0)" in text
    assert "Reach" not in text
    assert "formulas(goals).\nend_of_list.\n" in text


def test_render_formula_spells_quantifiers():
    th = fol.encode_data_theory(("a",))
    lines = [fol.render_formula(a) for a in th.axioms]
    assert any(line.startswith("all ") for line in lines)
    assert any("ε" in line for line in lines)
