"""Supercompilation: driving, folding, pruning, residual programs."""

import json
import random

import pytest

from superfcm import machine, scp
from superfcm.finder import FiniteModel
from superfcm.syntax import parse_program, print_program, print_term
from superfcm.terms import Char, Subst, Var, instance_of, seq, variables

import oracles

FIB_RESIDUAL = (
    "alphabet: 'Iab';\n"
    "start: f1(e.n);\n"
    "f1('') = ('b'):('a');\n"
    "f1('I':e.w1) = f2(e.w1, '', '');\n"
    "f2('', e.g2, e.g3) = (e.g2:'a'):(e.g3:'ba');\n"
    "f2('I':e.w3, e.g2, e.g3) = f2(e.w3, e.g3:'b', e.g2:'a':e.g3);\n"
)

FIBTEST_RESIDUAL = (
    "alphabet: 'FITab';\n"
    "start: f1(e.n);\n"
    "f1('') = 'T';\n"
    "f1('I':e.w1) = f2(e.w1, '', '');\n"
    "f2('', e.g2, e.g3) = 'T';\n"
    "f2('I':e.w3, e.g2, e.g3) = f2(e.w3, e.g3:'b', e.g2:'a':e.g3);\n"
)

G_RESIDUAL = (
    "alphabet: 'Abch';\n"
    "start: f1(e.ps, 'A');\n"
    "f1('b':e.w2, t.g2) = f1(e.w2, ('h':t.g2));\n"
    "f1('c':e.w2, ('h':e.w4)) = f2(e.w2, e.w4);\n"
    "f2('b':e.w3, e.w4) = f2(e.w3, ('h':e.w4));\n"
    "f2('c':e.w3, ('h':e.w7)) = f2(e.w3, e.w7);\n"
)

F_RESIDUAL = (
    "alphabet: 'Abch';\n"
    "start: f1(e.ps, '');\n"
    "f1('b':e.w2, e.g2) = f1(e.w2, 'h':e.g2);\n"
    "f1('c':e.w2, 'h':e.w3) = f1(e.w2, e.w3);\n"
)


def test_fib_residual_is_the_accumulator_program(scp_results):
    residual, report = scp_results["fib"]
    assert print_program(residual) == FIB_RESIDUAL
    assert print_term(report.format) == "(e.g4):(e.g5:'a')"
    assert not report.empty_function
    assert report.fcm_models == 0


def test_fib_residual_computes_the_same_pairs(scp_results):
    residual, _ = scp_results["fib"]
    words = oracles.fib_words(9)
    for n in range(8):
        theta = Subst({Var("e", "n"): seq([Char("I")] * n)}, validate=False)
        res = machine.eval(residual, theta)
        assert isinstance(res, machine.Value)
        assert print_term(res.term) == "('%s'):('%s')" % (words[n], words[n + 1])


def test_fibtest_suffix_check_vanishes(scp_results):
    residual, report = scp_results["fibtest"]
    assert print_program(residual) == FIBTEST_RESIDUAL
    assert report.format == Char("T")
    assert report.fcm_models == 0
    assert len(report.pruned) == 4


def test_fibA_exits_need_finite_models(scp_results):
    residual, report = scp_results["fibA"]
    assert print_program(residual) == FIBTEST_RESIDUAL
    assert report.format == Char("T")
    assert report.fcm_models == 2
    models = [
        pb.certificate
        for pb in report.pruned
        if isinstance(pb.certificate, FiniteModel)
    ]
    assert len(models) == 2
    assert all(m.size <= 8 for m in models)


def test_ex5_residual_has_exactly_one_rule(scp_results):
    residual, report = scp_results["ex5"]
    assert len(residual.rules) == 1
    assert print_program(residual) == (
        "alphabet: 'FTab';\n"
        "start: f1(e.q);\n"
        "f1(e.q) = 'F':('a':e.q:'a':e.q:'b'):(e.q:'a':e.q:'b':e.q);\n"
    )
    assert len(report.pruned) == 1
    pb = report.pruned[0]
    assert pb.certificate is not None
    assert not isinstance(pb.certificate, FiniteModel)


def test_g_is_the_empty_partial_function(scp_results):
    residual, report = scp_results["g"]
    assert report.empty_function
    assert print_program(residual) == G_RESIDUAL
    assert isinstance(report.format, Var) and report.format.kind == "e"


def test_f_is_the_empty_partial_function(scp_results):
    residual, report = scp_results["f"]
    assert report.empty_function
    assert print_program(residual) == F_RESIDUAL


def test_open_tests_stay_opaque_but_faithful(corpus_programs, scp_results):
    rng = random.Random(31)
    for name in ("openB", "openA"):
        residual, report = scp_results[name]
        assert report.graph.opaque
        assert isinstance(report.format, Var)
        original = corpus_programs[name]
        for _ in range(40):
            w = seq([Char("I")] * rng.randrange(9))
            theta = Subst({Var("e", "n"): w}, validate=False)
            a = machine.eval(original, theta)
            b = machine.eval(residual, theta)
            assert isinstance(a, machine.Value) and isinstance(b, machine.Value)
            assert a.term == b.term


def test_surviving_exits_are_instances_of_the_format(scp_results):
    for name, (residual, report) in scp_results.items():
        g = report.graph
        for vid, edge in g.exits.items():
            if g.status[vid] == "pruned":
                continue
            assert instance_of(edge.result, report.format) is not None, name


def test_reference_edges_note_real_instances(scp_results):
    for name, (_, report) in scp_results.items():
        g = report.graph
        for vid, ref in g.refs.items():
            target = g.nodes[ref.target].term
            from superfcm.terms import apply

            assert apply(ref.instance, target) == g.nodes[vid].term, name


def test_limits_abort_with_partial_graph():
    p = parse_program(
        "start: f(e.n);"
        " f('a':e.x) = g(e.x); f(e.x) = e.x;"
        " g('b':e.x) = h(e.x); g(e.x) = e.x;"
        " h('c':e.x) = f(e.x); h(e.x) = e.x;"
    )
    with pytest.raises(scp.LimitExceeded) as info:
        scp.supercompile(p, scp.Limits(max_nodes=2))
    assert info.value.graph.nodes


def test_graph_serializations(scp_results):
    for name, (_, report) in scp_results.items():
        blob = scp.graph_to_json(report.graph)
        json.dumps(blob)
        assert set(blob) >= {"nodes", "narrow", "references", "exits", "pruned"}
        dot = scp.graph_to_dot(report.graph)
        assert dot.startswith("digraph") and dot.rstrip().endswith("}")
        rep = report.to_json()
        json.dumps(rep)
        assert rep["nodes"] == report.nodes


def test_supercompile_is_deterministic(corpus_programs):
    p = corpus_programs["fibA"]
    r1, rep1 = scp.supercompile(p)
    r2, rep2 = scp.supercompile(p)
    assert print_program(r1) == print_program(r2)
    assert json.dumps(scp.graph_to_json(rep1.graph)) == json.dumps(
        scp.graph_to_json(rep2.graph)
    )


def test_residuals_declare_no_new_alphabet(scp_results, corpus_programs):
    for name, (residual, _) in scp_results.items():
        assert set(residual.alphabet) <= set(corpus_programs[name].alphabet)
