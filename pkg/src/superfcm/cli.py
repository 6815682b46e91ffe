"""Command-line interface: run, verify, scp and emit subcommands.

Exit codes: 0 success, 1 usage or input error, 2 evaluation stuck,
3 fuel exhausted, 4 supercompilation budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import fol, machine, scp
from .finder import SearchBudget, check_model, find_model, model_to_text
from .matching import LinearCertificate, NoSolution, check_equations
from .syntax import (
    Program,
    SyntaxError,
    parse_binding,
    parse_program,
    parse_term,
    print_program,
    print_term,
)
from .terms import Call, Subst, Term, variables

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STUCK = 2
EXIT_FUEL = 3
EXIT_LIMIT = 4


@dataclass
class RunConfig:
    """Checked bundle of everything a subcommand needs."""

    command: str
    program_path: str
    bindings: dict = field(default_factory=dict)
    fuel: int = 100000
    min_size: int = 2
    max_size: int = 16
    fcm_deadline: float = 10.0
    deadline: float = 120.0
    format: str = "text"
    seed: int = 0

    def validate(self) -> None:
        if self.deadline <= 0 or self.fcm_deadline <= 0:
            raise ValueError("deadlines must be positive")
        if not 2 <= self.min_size <= self.max_size:
            raise ValueError("need max size >= min size >= 2")


def _build_config(args: argparse.Namespace) -> RunConfig:
    deadline = args.deadline
    if deadline is None:
        env = os.environ.get("SUPERFCM_DEADLINE")
        deadline = float(env) if env else 120.0
    cfg = RunConfig(
        command=args.command,
        program_path=args.program,
        fuel=getattr(args, "fuel", 100000),
        min_size=args.min_size,
        max_size=args.max_size,
        fcm_deadline=args.fcm_deadline,
        deadline=deadline,
        format=getattr(args, "format", "text"),
        seed=args.seed,
    )
    for text in getattr(args, "bind", None) or []:
        v, t = parse_binding(text)
        cfg.bindings[v] = t
    cfg.validate()
    return cfg


def _load_program(path: str) -> Program:
    with open(path, "r") as fh:
        return parse_program(fh.read())


def _parse_target(text: str) -> tuple[str, Term]:
    fn, eq, rhs = text.partition("=")
    if not eq or not fn.strip():
        raise ValueError("target must look like Fn='datum'")
    return fn.strip(), parse_term(rhs.strip())


def cmd_run(cfg: RunConfig) -> int:
    p = _load_program(cfg.program_path)
    need = variables(p.initial)
    missing = [v for v in need if v not in cfg.bindings]
    if missing:
        print(
            "missing bindings for: %s"
            % ", ".join("%s.%s" % (v.kind, v.name) for v in missing),
            file=sys.stderr,
        )
        return EXIT_ERROR
    theta = Subst(cfg.bindings)
    res = machine.eval(p, theta, fuel=cfg.fuel)
    if isinstance(res, machine.Value):
        print(print_term(res.term))
        print(
            "steps: %d, match operations: %d"
            % (res.stats.steps, res.stats.match_ops)
        )
        return EXIT_OK
    if isinstance(res, machine.Stuck):
        print(
            "stuck after %d steps at: %s"
            % (res.stats.steps, print_term(res.call))
        )
        return EXIT_STUCK
    print("fuel exhausted after %d steps" % res.stats.steps)
    return EXIT_FUEL


def _verify_one_step(cfg: RunConfig, p: Program, rule_number: int) -> dict:
    if not isinstance(p.initial, Call):
        raise ValueError("one-step mode needs a call as the initial term")
    if not 1 <= rule_number <= len(p.rules):
        raise ValueError("rule number out of range")
    rule = p.rules[rule_number - 1]
    goal = fol.encode_one_step_goal(p.initial, rule, p.alphabet)
    eqs = fol.one_step_equations(p.initial, rule)
    linear = None
    if eqs is not None:
        out = check_equations(eqs, p.alphabet)
        if isinstance(out, NoSolution):
            linear = out
    theory = fol.encode_data_theory(p.alphabet)
    theory.goal = goal
    budget = SearchBudget(
        min_size=cfg.min_size, max_size=cfg.max_size, deadline=cfg.deadline
    )
    res = find_model(theory, budget)
    if res.model is not None and check_model(res.model, theory):
        return {
            "verdict": "SAFE",
            "reason": "a finite model shows rule %d one-step-unreachable"
            % rule_number,
            "model": res.model,
            "linear": linear,
        }
    if linear is not None:
        return {
            "verdict": "SAFE",
            "reason": "letter-count arithmetic refutes the one-step equations",
            "model": None,
            "linear": linear,
        }
    return {"verdict": "UNKNOWN", "reason": res.reason, "model": None}


def _verify_target(cfg: RunConfig, p: Program, target: str) -> dict:
    fn, result = _parse_target(target)
    enc = fol.encode_program_overapprox(p)
    theory = enc.theory
    theory.goal = fol.goal_for_target(enc, fn, result)
    budget = SearchBudget(
        min_size=cfg.min_size, max_size=cfg.max_size, deadline=cfg.deadline
    )
    res = find_model(theory, budget)
    if res.model is not None and check_model(res.model, theory):
        return {
            "verdict": "SAFE",
            "reason": "a finite model shows %s never yields %s"
            % (fn, print_term(result)),
            "model": res.model,
        }
    return {"verdict": "UNKNOWN", "reason": res.reason, "model": None}


def cmd_verify(cfg: RunConfig, target: str | None, one_step: int | None) -> int:
    p = _load_program(cfg.program_path)
    try:
        if one_step is not None:
            outcome = _verify_one_step(cfg, p, one_step)
        elif target is not None:
            outcome = _verify_target(cfg, p, target)
        else:
            print("verify needs --target or --one-step", file=sys.stderr)
            return EXIT_ERROR
    except fol.UnsupportedShape as e:
        outcome = {"verdict": "UNKNOWN", "reason": "unsupported shape: %s" % e, "model": None}
    model = outcome.get("model")
    if cfg.format == "json":
        blob = {
            "verdict": outcome["verdict"],
            "reason": outcome["reason"],
            "model": model.to_json() if model is not None else None,
        }
        lin = outcome.get("linear")
        if lin is not None and isinstance(lin.certificate, LinearCertificate):
            blob["arithmetic"] = {
                "kind": lin.certificate.kind,
                "detail": lin.certificate.detail,
            }
        print(json.dumps(blob, indent=2, sort_keys=True))
    else:
        print("%s: %s" % (outcome["verdict"], outcome["reason"]))
        lin = outcome.get("linear")
        if lin is not None and isinstance(lin.certificate, LinearCertificate):
            print("arithmetic: %s" % lin.certificate.detail)
        if model is not None:
            print(model_to_text(model))
    return EXIT_OK


def cmd_scp(cfg: RunConfig, out: str | None, dot_path: str | None) -> int:
    p = _load_program(cfg.program_path)
    limits = scp.Limits(
        deadline=cfg.deadline,
        fcm_deadline=cfg.fcm_deadline,
        fcm_min_size=cfg.min_size,
        fcm_max_size=min(cfg.max_size, 8),
    )
    try:
        residual, report = scp.supercompile(p, limits)
    except scp.LimitExceeded as e:
        print("limit exceeded: %s (%d nodes built)" % (e, len(e.graph.nodes)), file=sys.stderr)
        return EXIT_LIMIT
    text = print_program(residual)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    if dot_path:
        with open(dot_path, "w") as fh:
            fh.write(scp.graph_to_dot(report.graph))
    if cfg.format == "json":
        print(
            json.dumps(
                {
                    "residual": text,
                    "report": report.to_json(),
                    "graph": scp.graph_to_json(report.graph),
                },
                indent=2,
                sort_keys=True,
            )
        )
        return EXIT_OK
    if cfg.format == "dot":
        print(scp.graph_to_dot(report.graph), end="")
        return EXIT_OK
    print(text, end="")
    print()
    if report.empty_function:
        print("output: the empty partial function (no exit is reachable)")
    else:
        print("output format: %s" % print_term(report.format))
    print("nodes: %d, pruned branches: %d, finite models used: %d" % (
        report.nodes, len(report.pruned), report.fcm_models))
    for pb in report.pruned:
        cert = ""
        if pb.certificate is not None:
            cert = " [%s]" % _certificate_text(pb.certificate)
        print("  pruned: node %d rule %d, %s%s" % (pb.node, pb.rule_index + 1, pb.reason, cert))
    return EXIT_OK


def _certificate_text(cert: object) -> str:
    from .finder import FiniteModel

    if isinstance(cert, FiniteModel):
        return "finite model of size %d" % cert.size
    if isinstance(cert, LinearCertificate):
        return cert.detail
    return str(cert)


def cmd_emit(cfg: RunConfig, what: str, target: str | None, one_step: int | None) -> int:
    p = _load_program(cfg.program_path)
    if what == "dot":
        try:
            _, report = scp.supercompile(
                p,
                scp.Limits(
                    deadline=cfg.deadline,
                    fcm_deadline=cfg.fcm_deadline,
                    fcm_min_size=cfg.min_size,
                    fcm_max_size=min(cfg.max_size, 8),
                ),
            )
        except scp.LimitExceeded as e:
            print(scp.graph_to_dot(e.graph), end="")
            return EXIT_LIMIT
        print(scp.graph_to_dot(report.graph), end="")
        return EXIT_OK
    if one_step is not None:
        if not isinstance(p.initial, Call):
            print("one-step mode needs a call as the initial term", file=sys.stderr)
            return EXIT_ERROR
        if not 1 <= one_step <= len(p.rules):
            print("rule number out of range", file=sys.stderr)
            return EXIT_ERROR
        rule = p.rules[one_step - 1]
        theory = fol.encode_data_theory(p.alphabet)
        theory.goal = fol.encode_one_step_goal(p.initial, rule, p.alphabet)
    elif p.rules:
        enc = fol.encode_program_overapprox(p)
        theory = enc.theory
        if target is not None:
            fn, result = _parse_target(target)
            theory.goal = fol.goal_for_target(enc, fn, result)
    else:
        theory = fol.encode_data_theory(p.alphabet)
    if what == "mace4":
        print(fol.export_mace4(theory), end="")
        return EXIT_OK
    for a in theory.axioms:
        print(fol.render_formula(a))
    if theory.goal is not None:
        print("goal: %s" % fol.render_formula(theory.goal))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="superfcm",
        description="Run, verify, supercompile or export rewriting programs.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("program", help="path to a .l program file")
        sp.add_argument("--min-size", type=int, default=2)
        sp.add_argument("--max-size", type=int, default=16)
        sp.add_argument("--deadline", type=float, default=None,
                        help="global time budget in seconds (default 120, or SUPERFCM_DEADLINE)")
        sp.add_argument("--fcm-deadline", type=float, default=10.0,
                        help="per-call model search budget in seconds")
        sp.add_argument("--seed", type=int, default=0)

    run = sub.add_parser("run", help="evaluate the program on bound inputs")
    common(run)
    run.add_argument("--bind", action="append", default=[],
                     metavar="VAR=TERM", help="e.g. --bind e.n=\"'III'\"")
    run.add_argument("--fuel", type=int, default=100000)

    ver = sub.add_parser("verify", help="refute reachability with a finite model")
    common(ver)
    ver.add_argument("--target", default=None, metavar="FN='DATUM'")
    ver.add_argument("--one-step", type=int, nargs="?", const=-1, default=None,
                     metavar="RULE", help="one-step unreachability of a rule")
    ver.add_argument("--rule", type=int, default=None)
    ver.add_argument("--format", choices=["text", "json"], default="text")

    sc = sub.add_parser("scp", help="supercompile and report")
    common(sc)
    sc.add_argument("--out", default=None, help="write the residual program here")
    sc.add_argument("--dot", default=None, help="write the unfold graph here as dot")
    sc.add_argument("--format", choices=["text", "json", "dot"], default="text")

    em = sub.add_parser("emit", help="export the first-order encoding or graph")
    common(em)
    em.add_argument("--what", choices=["fol", "mace4", "dot"], required=True)
    em.add_argument("--target", default=None, metavar="FN='DATUM'")
    em.add_argument("--one-step", type=int, default=None, metavar="RULE")
    em.add_argument("--format", choices=["text"], default="text")
    return top


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _build_config(args)
    except (ValueError, SyntaxError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "verify":
            one_step = args.one_step
            if one_step == -1:
                if args.rule is None:
                    print("--one-step needs a rule number (or --rule)", file=sys.stderr)
                    return EXIT_ERROR
                one_step = args.rule
            return cmd_verify(cfg, args.target, one_step)
        if args.command == "scp":
            return cmd_scp(cfg, args.out, args.dot)
        return cmd_emit(cfg, args.what, args.target, args.one_step)
    except FileNotFoundError as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR
    except (SyntaxError, ValueError, fol.UnsupportedShape) as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
