"""Command-line interface behaviour, driven in-process through cli.main."""

import json
import os

import pytest

from superfcm import cli

PROGRAMS = os.path.join(
    os.path.dirname(cli.__file__), "programs"
)


def corpus(name):
    return os.path.join(PROGRAMS, name + ".l")


def run_cli(capsys, argv):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_run_prints_value_and_stats(capsys):
    rc, out, _ = run_cli(
        capsys, ["run", corpus("fib"), "--bind", "e.n='III'"]
    )
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "('aba'):('baaba')"
    assert lines[1] == "steps: 5, match operations: 15"


def test_run_reports_missing_bindings(capsys):
    rc, _, err = run_cli(capsys, ["run", corpus("fib")])
    assert rc == 1
    assert "missing bindings" in err and "e.n" in err


def test_run_reports_stuck_calls(capsys):
    rc, out, _ = run_cli(capsys, ["run", corpus("g"), "--bind", "e.ps="])
    assert rc == 2
    assert out.strip() == "stuck after 0 steps at: g('', 'A', 'A')"


def test_run_reports_fuel_exhaustion(capsys):
    rc, out, _ = run_cli(
        capsys, ["run", corpus("fib"), "--bind", "e.n='III'", "--fuel", "3"]
    )
    assert rc == 3
    assert out.strip() == "fuel exhausted after 3 steps"


def test_run_rejects_malformed_bindings(capsys):
    rc, _, err = run_cli(
        capsys, ["run", corpus("fib"), "--bind", "e.n='unclosed"]
    )
    assert rc == 1
    assert err.strip()


def test_missing_program_file(capsys):
    rc, _, err = run_cli(capsys, ["run", "/no/such/file.l"])
    assert rc == 1
    assert err.strip()


def test_scp_writes_residual_and_graph(capsys, tmp_path):
    out_file = tmp_path / "residual.l"
    dot_file = tmp_path / "graph.dot"
    rc, out, _ = run_cli(
        capsys,
        [
            "scp",
            corpus("fib"),
            "--out",
            str(out_file),
            "--dot",
            str(dot_file),
        ],
    )
    assert rc == 0
    assert "output format: (e.g4):(e.g5:'a')" in out
    text = out_file.read_text()
    assert "f2('I':e.w3, e.g2, e.g3) = f2(e.w3, e.g3:'b', e.g2:'a':e.g3);" in text
    assert dot_file.read_text().startswith("digraph")


def test_scp_reports_the_empty_partial_function(capsys):
    rc, out, _ = run_cli(capsys, ["scp", corpus("g")])
    assert rc == 0
    assert "the empty partial function" in out


def test_scp_json_format(capsys):
    rc, out, _ = run_cli(capsys, ["scp", corpus("g"), "--format", "json"])
    assert rc == 0
    blob = json.loads(out)
    assert set(blob) >= {"residual", "report", "graph"}
    assert blob["report"]["empty_function"] is True
    assert blob["report"]["nodes"] == 5


def test_scp_deadline_exceeded(capsys):
    rc, _, err = run_cli(
        capsys, ["scp", corpus("fibA"), "--deadline", "0.000001"]
    )
    assert rc == 4
    assert "limit exceeded" in err


def test_verify_one_step_finds_a_model(capsys, tmp_path):
    path = tmp_path / "first.l"
    path.write_text("start: f('b':e.n);\nf('a':e.x) = 'T';\n")
    rc, out, _ = run_cli(
        capsys,
        ["verify", str(path), "--one-step", "1", "--max-size", "8"],
    )
    assert rc == 0
    assert "SAFE" in out and "rule 1" in out
    assert "size 4" in out


def test_verify_one_step_arithmetic_certificate(capsys, tmp_path):
    path = tmp_path / "count.l"
    path.write_text("start: f('a');\nf(e.x:'b') = 'T';\n")
    rc, out, _ = run_cli(
        capsys,
        ["verify", str(path), "--one-step", "1", "--max-size", "8"],
    )
    assert rc == 0
    assert "SAFE" in out
    assert "arithmetic:" in out


def test_verify_target_safe_json(capsys, tmp_path):
    path = tmp_path / "safe.l"
    path.write_text("start: f('b':e.n);\nf('a':e.x) = 'T';\n")
    rc, out, _ = run_cli(
        capsys,
        [
            "verify",
            str(path),
            "--target",
            "f='T'",
            "--format",
            "json",
            "--max-size",
            "8",
        ],
    )
    assert rc == 0
    blob = json.loads(out)
    assert blob["verdict"] == "SAFE"
    assert blob["model"]["size"] <= 8


def test_verify_unknown_when_target_is_reachable(capsys, tmp_path):
    path = tmp_path / "reach.l"
    path.write_text("start: f(e.n);\nf(e.x) = 'T';\n")
    rc, out, _ = run_cli(
        capsys,
        [
            "verify",
            str(path),
            "--target",
            "f='T'",
            "--format",
            "json",
            "--max-size",
            "3",
        ],
    )
    assert rc == 0
    blob = json.loads(out)
    assert blob["verdict"] == "UNKNOWN"
    assert blob["model"] is None


def test_verify_requires_a_goal(capsys):
    rc, _, err = run_cli(capsys, ["verify", corpus("fib")])
    assert rc == 1
    assert "--target or --one-step" in err


def test_emit_mace4_theory(capsys):
    rc, out, _ = run_cli(capsys, ["emit", corpus("fib"), "--what", "mace4"])
    assert rc == 0
    assert "formulas(assumptions)." in out
    assert "  (x * y) * z = x * (y * z)." in out
    assert "end_of_list." in out


def test_emit_fol_one_step_goal(capsys):
    rc, out, _ = run_cli(
        capsys, ["emit", corpus("ex5"), "--what", "fol", "--one-step", "1"]
    )
    assert rc == 0
    assert "exists" in out and "β" in out
    assert "goal:" in out


def test_emit_dot_graph(capsys):
    rc, out, _ = run_cli(capsys, ["emit", corpus("fib"), "--what", "dot"])
    assert rc == 0
    assert out.startswith("digraph")


def test_scp_output_is_deterministic(capsys):
    rc1, out1, _ = run_cli(capsys, ["scp", corpus("fibA"), "--format", "json"])
    rc2, out2, _ = run_cli(capsys, ["scp", corpus("fibA"), "--format", "json"])
    assert rc1 == rc2 == 0
    assert out1 == out2
