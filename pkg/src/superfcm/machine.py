"""Strict evaluation of ground terms under first-matching-rule semantics.

The redex of a ground state is its leftmost-innermost call whose arguments
are object terms (every ground non-passive state has one).  One step tries
the redex function's rules top-down; the first rule whose patterns match
under the leftmost-shortest discipline rewrites the redex.  Evaluation
iterates steps under a fuel budget and reports one of three outcomes: a
value, a stuck state with the call no rule matches, or fuel exhaustion.

nd_step is the verification-side relation: at the same redex it applies
every rule under every matching substitution, which overapproximates the
deterministic step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import matching
from .matching import OpCounter, Solution
from .syntax import Program
from .terms import Call, Concat, Paren, Subst, Term, apply, is_ground, is_object, is_passive, seq


@dataclass
class Stats:
    """Work counters: rule applications and elementary matching operations."""

    steps: int = 0
    match_ops: int = 0


class EvalResult:
    pass


@dataclass(frozen=True)
class Value(EvalResult):
    term: Term
    stats: Stats = field(default_factory=Stats)


@dataclass(frozen=True)
class Stuck(EvalResult):
    state: Term
    call: Call
    stats: Stats = field(default_factory=Stats)


@dataclass(frozen=True)
class FuelExhausted(EvalResult):
    state: Term
    stats: Stats = field(default_factory=Stats)


class _Outcome:
    __slots__ = ("tag", "term", "call")

    def __init__(self, tag: str, term: Term | None = None, call: Call | None = None):
        self.tag = tag  # 'stepped' | 'stuck' | 'none'
        self.term = term
        self.call = call


def _apply_first_rule(
    p: Program, call: Call, count: OpCounter | None
) -> Term | None:
    for rule in p.rules_for(call.fn):
        if len(rule.params) != len(call.args):
            continue
        out = matching.markov_match(call.args, list(rule.params), count)
        if isinstance(out, Solution):
            return apply(out.binding, rule.rhs)
    return None


def _step_in(p: Program, t: Term, count: OpCounter | None) -> _Outcome:
    if isinstance(t, Call):
        new_args = list(t.args)
        for i, a in enumerate(t.args):
            sub = _step_in(p, a, count)
            if sub.tag == "stepped":
                new_args[i] = sub.term
                return _Outcome("stepped", Call(t.fn, tuple(new_args)))
            if sub.tag == "stuck":
                return sub
        if all(is_object(a) for a in t.args):
            rhs = _apply_first_rule(p, t, count)
            if rhs is None:
                return _Outcome("stuck", call=t)
            return _Outcome("stepped", rhs)
        return _Outcome("none")
    if isinstance(t, Concat):
        its = list(t.items)
        for i, x in enumerate(its):
            sub = _step_in(p, x, count)
            if sub.tag == "stepped":
                its[i] = sub.term
                return _Outcome("stepped", seq(its))
            if sub.tag == "stuck":
                return sub
        return _Outcome("none")
    if isinstance(t, Paren):
        sub = _step_in(p, t.body, count)
        if sub.tag == "stepped":
            return _Outcome("stepped", Paren(sub.term))
        return sub
    return _Outcome("none")


def step(p: Program, state: Term, stats: Stats | None = None) -> Term | None:
    """One deterministic step, or None when the redex matches no rule."""
    count = OpCounter() if stats is not None else None
    out = _step_in(p, state, count)
    if stats is not None:
        stats.match_ops += count.ops
        if out.tag == "stepped":
            stats.steps += 1
    return out.term if out.tag == "stepped" else None


def eval_state(p: Program, state: Term, fuel: int = 1_000_000) -> EvalResult:
    """Iterate steps from an arbitrary ground state."""
    if not is_ground(state):
        raise ValueError("evaluation needs a ground state")
    stats = Stats()
    count = OpCounter()
    current = state
    for _ in range(fuel):
        if is_passive(current):
            stats.match_ops = count.ops
            return Value(current, stats)
        out = _step_in(p, current, count)
        if out.tag == "stuck":
            stats.match_ops = count.ops
            return Stuck(current, out.call, stats)
        assert out.tag == "stepped"
        stats.steps += 1
        current = out.term
    stats.match_ops = count.ops
    if is_passive(current):
        return Value(current, stats)
    return FuelExhausted(current, stats)


def eval(p: Program, theta: Subst | None = None, fuel: int = 1_000_000) -> EvalResult:
    """Evaluate the program's initial term under a data substitution."""
    state = apply(theta, p.initial) if theta is not None else p.initial
    return eval_state(p, state, fuel)


def _redex(t: Term) -> Call | None:
    if isinstance(t, Call):
        for a in t.args:
            r = _redex(a)
            if r is not None:
                return r
        if all(is_object(a) for a in t.args):
            return t
        return None
    if isinstance(t, Concat):
        for x in t.items:
            r = _redex(x)
            if r is not None:
                return r
        return None
    if isinstance(t, Paren):
        return _redex(t.body)
    return None


def _replace_redex(t: Term, redex: Call, repl: Term) -> tuple[Term, bool]:
    if t is redex:
        return repl, True
    if isinstance(t, Call):
        args = list(t.args)
        for i, a in enumerate(args):
            new, done = _replace_redex(a, redex, repl)
            if done:
                args[i] = new
                return Call(t.fn, tuple(args)), True
        return t, False
    if isinstance(t, Concat):
        its = list(t.items)
        for i, x in enumerate(its):
            new, done = _replace_redex(x, redex, repl)
            if done:
                its[i] = new
                return seq(its), True
        return t, False
    if isinstance(t, Paren):
        new, done = _replace_redex(t.body, redex, repl)
        return (Paren(new), True) if done else (t, False)
    return t, False


def nd_step(p: Program, state: Term) -> list[Term]:
    """All successors at the redex when any rule may fire under any match."""
    redex = _redex(state)
    if redex is None:
        return []
    out: list[Term] = []
    seen: set[Term] = set()
    for rule in p.rules_for(redex.fn):
        if len(rule.params) != len(redex.args):
            continue
        for binding in matching.match_all(list(rule.params), list(redex.args)):
            rhs = apply(binding, rule.rhs)
            new, done = _replace_redex(state, redex, rhs)
            assert done
            if new not in seen:
                seen.add(new)
                out.append(new)
    return out
