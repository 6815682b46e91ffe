"""Associative pattern matching.

Three engines share this module:

  * match_first / match_all: matching passive patterns against rigid values
    (data, or terms whose variables are treated as opaque atoms).  Among all
    matches, match_first returns the one in which the leftmost e-variable
    takes the shortest value, then the next, and so on: open matching is
    explored shortest-prefix-first, so depth-first order realizes exactly
    that discipline.

  * narrow_match: matching a rule left-hand side against a parameterized
    configuration.  The result is a finite set of branches, each a narrowing
    of the configuration parameters plus a binding of the rule variables,
    covering every data instance of the configuration that matches the rule.
    Equations outside the supported class give Unknown rather than a wrong
    partition.

  * prove_unsolvable: refutation of parameter-only word equations by exact
    letter-count arithmetic (with bounded instantiation), optionally followed
    by a finite-model search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .terms import (
    Call,
    Char,
    EMPTY,
    Paren,
    Subst,
    Term,
    Var,
    apply,
    items,
    seq,
    variables,
)


class MatchOutcome:
    pass


@dataclass(frozen=True)
class Solution(MatchOutcome):
    binding: Subst


@dataclass(frozen=True)
class Branch:
    narrowing: Subst
    binding: Subst


@dataclass(frozen=True)
class Solutions(MatchOutcome):
    branches: tuple[Branch, ...]


@dataclass(frozen=True)
class NoSolution(MatchOutcome):
    reason: str
    certificate: object = None


@dataclass(frozen=True)
class Unknown(MatchOutcome):
    reason: str


class OpCounter:
    """Counts elementary matching operations (comparisons and bindings)."""

    __slots__ = ("ops",)

    def __init__(self) -> None:
        self.ops = 0

    def tick(self, n: int = 1) -> None:
        self.ops += n


def _binding_ok(v: Var, val: Term) -> bool:
    if v.kind == "e":
        return True
    if v.kind == "s":
        return isinstance(val, Char) or (isinstance(val, Var) and val.kind == "s")
    return isinstance(val, (Char, Paren)) or (
        isinstance(val, Var) and val.kind in ("s", "t")
    )


def _match_items(
    pats: tuple[Term, ...],
    vals: tuple[Term, ...],
    binding: dict[Var, Term],
    count: OpCounter | None,
) -> Iterator[dict[Var, Term]]:
    """All ways to match a pattern item sequence against a rigid value item
    sequence, shortest e-prefixes first."""
    if not pats:
        if not vals:
            yield binding
        return
    p = pats[0]
    rest = pats[1:]
    if isinstance(p, Char):
        if count:
            count.tick()
        if vals and vals[0] == p:
            yield from _match_items(rest, vals[1:], binding, count)
        return
    if isinstance(p, Paren):
        if count:
            count.tick()
        if vals and isinstance(vals[0], Paren):
            for b in _match_items(items(p.body), items(vals[0].body), binding, count):
                yield from _match_items(rest, vals[1:], b, count)
        return
    if isinstance(p, Var):
        bound = binding.get(p)
        if p.kind in ("s", "t"):
            if not vals:
                return
            v0 = vals[0]
            if count:
                count.tick()
            if bound is not None:
                if bound == v0:
                    yield from _match_items(rest, vals[1:], binding, count)
            elif _binding_ok(p, v0):
                b = dict(binding)
                b[p] = v0
                yield from _match_items(rest, vals[1:], b, count)
            return
        # e-variable
        if bound is not None:
            pre = items(bound)
            n = len(pre)
            if count:
                count.tick(max(n, 1))
            if vals[:n] == pre:
                yield from _match_items(rest, vals[n:], binding, count)
            return
        if not rest:
            # a trailing e-variable takes the whole remainder in one step
            if count:
                count.tick()
            b = dict(binding)
            b[p] = seq(vals)
            yield b
            return
        for n in range(len(vals) + 1):
            if count:
                count.tick()
            b = dict(binding)
            b[p] = seq(vals[:n])
            yield from _match_items(rest, vals[n:], b, count)
        return
    if isinstance(p, Call):
        # call patterns turn up when one configuration is checked against
        # another; calls only align with equal calls, argument by argument
        if count:
            count.tick()
        if (
            vals
            and isinstance(vals[0], Call)
            and vals[0].fn == p.fn
            and len(vals[0].args) == len(p.args)
        ):

            def args_then_rest(
                k: int, b: dict[Var, Term]
            ) -> Iterator[dict[Var, Term]]:
                if k == len(p.args):
                    yield from _match_items(rest, vals[1:], b, count)
                    return
                for b2 in _match_items(
                    items(p.args[k]), items(vals[0].args[k]), b, count
                ):
                    yield from args_then_rest(k + 1, b2)

            yield from args_then_rest(0, binding)
        return
    raise ValueError("pattern is not passive: %r" % (p,))


def _match_lists(
    patterns: Sequence[Term],
    values: Sequence[Term],
    count: OpCounter | None,
) -> Iterator[dict[Var, Term]]:
    if len(patterns) != len(values):
        return

    def go(i: int, binding: dict[Var, Term]) -> Iterator[dict[Var, Term]]:
        if i == len(patterns):
            yield binding
            return
        for b in _match_items(items(patterns[i]), items(values[i]), binding, count):
            yield from go(i + 1, b)

    yield from go(0, {})


def match_first(
    patterns: Sequence[Term],
    values: Sequence[Term],
    count: OpCounter | None = None,
) -> Subst | None:
    """First match in leftmost-shortest order, or None."""
    for b in _match_lists(patterns, values, count):
        return Subst(b, validate=False)
    return None


def match_all(
    patterns: Sequence[Term],
    values: Sequence[Term],
    count: OpCounter | None = None,
) -> list[Subst]:
    return [Subst(b, validate=False) for b in _match_lists(patterns, values, count)]


def match_rigid(patterns: Sequence[Term], values: Sequence[Term]) -> Subst | None:
    """Instance check: variables on the value side are rigid atoms."""
    return match_first(patterns, values)


def markov_match(
    values: Sequence[Term],
    patterns: Sequence[Term],
    count: OpCounter | None = None,
) -> MatchOutcome:
    """Match object argument values against passive patterns.

    Matching the argument tuple is the same as matching the single equation
    (p1)...(pn) = (v1)...(vn); variables are shared across positions and the
    leftmost-shortest discipline picks one substitution when several exist.
    """
    got = match_first(patterns, values, count)
    if got is None:
        return NoSolution("no substitution matches")
    return Solution(got)


# ---------------------------------------------------------------------------
# Narrowing matcher


class _Fresh:
    """Generator of fresh parameters, one namespace per narrowing problem."""

    def __init__(self, taken: set[str], stem: str = "w"):
        self.taken = set(taken)
        self.stem = stem
        self.n = 0

    def var(self, kind: str) -> Var:
        while True:
            self.n += 1
            name = "%s%d" % (self.stem, self.n)
            if name not in self.taken:
                self.taken.add(name)
                return Var(kind, name)


_UNKNOWN = object()


@dataclass
class _State:
    eqs: list[tuple[tuple[Term, ...], tuple[Term, ...]]]
    binding: dict[Var, Term]
    narrowing: dict[Var, Term]


def _subst_items(theta: dict[Var, Term], its: tuple[Term, ...]) -> tuple[Term, ...]:
    s = Subst(theta, validate=False)
    return items(apply(s, seq(its)))


def _apply_step(state: _State, change: dict[Var, Term], to_params: bool) -> _State:
    eqs = [
        (_subst_items(change, l), _subst_items(change, r)) for (l, r) in state.eqs
    ]
    s = Subst(change, validate=False)
    binding = {v: apply(s, t) for v, t in state.binding.items()}
    if to_params:
        narrowing = {v: apply(s, t) for v, t in state.narrowing.items()}
        for v, t in change.items():
            if v not in narrowing:
                narrowing[v] = t
    else:
        narrowing = dict(state.narrowing)
        binding.update(change)
    return _State(eqs, binding, narrowing)


def _is_param(t: Term, flex: set[Var]) -> bool:
    return isinstance(t, Var) and t not in flex


def _no_flex(its: tuple[Term, ...], flex: set[Var]) -> bool:
    return not any(v in flex for v in variables(seq(its)))


def narrow_match(
    config_args: Sequence[Term],
    pattern_args: Sequence[Term],
    nosol: Callable[[list[tuple[Term, Term]]], MatchOutcome] | None = None,
    fresh_taken: set[str] | None = None,
    split_budget: int = 200,
) -> MatchOutcome:
    """Match rule patterns against parameterized configuration arguments.

    Pattern variables must be renamed apart from the configuration's
    parameters by the caller.  `nosol` refutes residual parameter-only
    equations (defaults to the letter-count analyzer).
    """
    if len(config_args) != len(pattern_args):
        return NoSolution("arity mismatch")
    flex: set[Var] = set()
    for p in pattern_args:
        flex.update(variables(p))
    params: list[Var] = []
    for c in config_args:
        for v in variables(c):
            if v not in params:
                params.append(v)
    if flex & set(params):
        raise ValueError("pattern variables not renamed apart from parameters")
    taken = set(fresh_taken or ())
    taken.update(v.name for v in flex)
    taken.update(v.name for v in params)
    fresh = _Fresh(taken)
    if nosol is None:
        nosol = lambda eqs: check_equations(eqs, None)

    eqs0 = [(items(p), items(c)) for p, c in zip(pattern_args, config_args)]
    budget = [split_budget]
    branches: list[Branch] = []
    saw_unknown = [False]

    def finish(state: _State) -> None:
        missing = [v for v in flex if v not in state.binding]
        for v in missing:
            # a pattern variable the equations never constrained; impossible
            # for well-formed patterns, but bind defensively
            state.binding[v] = fresh.var(v.kind)
        narrowing = {
            v: t for v, t in state.narrowing.items() if v in params and t != v
        }
        branches.append(
            Branch(Subst(narrowing, validate=False), Subst(state.binding, validate=False))
        )

    def split(state: _State, var: Var, alts: list[dict[Var, Term]]) -> None:
        if budget[0] <= 0:
            saw_unknown[0] = True
            return
        budget[0] -= 1
        for change in alts:
            go(_apply_step(state, change, to_params=True))

    def step_end(
        state: _State, l: Term, r: Term, at_front: bool
    ) -> tuple[str, object]:
        """Classify one end of the first equation.  Returns an action tag."""
        flexv = isinstance(l, Var) and l in flex
        if isinstance(l, Char):
            if isinstance(r, Char):
                return ("peel", None) if l == r else ("fail", None)
            if isinstance(r, Paren):
                return ("fail", None)
            if _is_param(r, flex):
                if r.kind in ("s", "t"):
                    return ("narrow", {r: l})
                e2 = fresh.var("e")
                alt = seq((l, e2)) if at_front else seq((e2, l))
                return ("split", (r, [{r: EMPTY}, {r: alt}]))
            return ("blocked", None)
        if isinstance(l, Paren):
            if isinstance(r, Paren):
                return ("descend", None)
            if isinstance(r, Char):
                return ("fail", None)
            if _is_param(r, flex):
                if r.kind == "s":
                    return ("fail", None)
                if r.kind == "t":
                    return ("narrow", {r: Paren(fresh.var("e"))})
                p2 = Paren(fresh.var("e"))
                e2 = fresh.var("e")
                alt = seq((p2, e2)) if at_front else seq((e2, p2))
                return ("split", (r, [{r: EMPTY}, {r: alt}]))
            return ("blocked", None)
        if flexv:
            assert isinstance(l, Var)
            if l.kind in ("s", "t"):
                if isinstance(r, Char):
                    return ("bind", {l: r})
                if isinstance(r, Paren):
                    if l.kind == "t":
                        return ("bind", {l: r})
                    return ("fail", None)
                if _is_param(r, flex):
                    if r.kind == "s":
                        return ("bind", {l: r})
                    if r.kind == "t":
                        if l.kind == "t":
                            return ("bind", {l: r})
                        s2 = fresh.var("s")
                        return ("narrow_bind", ({r: s2}, {l: s2}))
                    one = fresh.var(l.kind)
                    e2 = fresh.var("e")
                    alt = seq((one, e2)) if at_front else seq((e2, one))
                    return ("split", (r, [{r: EMPTY}, {r: alt}]))
                return ("blocked", None)
            return ("blocked", None)  # open e-variable of the rule
        if _is_param(l, flex):
            # a parameter that reached the pattern side through an earlier
            # binding of a repeated rule variable
            if _is_param(r, flex) and l == r:
                return ("peel", None)
            if isinstance(r, Char) and isinstance(l, Var) and l.kind in ("s", "t"):
                return ("narrow", {l: r})
            if isinstance(l, Var) and l.kind == "e":
                if isinstance(r, Char):
                    e2 = fresh.var("e")
                    alt = seq((r, e2)) if at_front else seq((e2, r))
                    return ("split", (l, [{l: EMPTY}, {l: alt}]))
                if isinstance(r, Paren):
                    return ("blocked", None)
            return ("blocked", None)
        return ("blocked", None)

    def go(state: _State) -> None:
        while True:
            if not state.eqs:
                finish(state)
                return
            L, R = state.eqs[0]
            rest = state.eqs[1:]
            if not L and not R:
                state = _State(rest, state.binding, state.narrowing)
                continue
            if not L or not R:
                # the nonempty side must vanish item by item
                it = (L or R)[0]
                if isinstance(it, Var):
                    if it in flex:
                        if it.kind == "e":
                            state = _apply_step(state, {it: EMPTY}, to_params=False)
                            continue
                        return  # s/t cannot be empty
                    if it.kind == "e":
                        state = _apply_step(state, {it: EMPTY}, to_params=True)
                        continue
                    return
                return  # a char or paren cannot vanish
            l, r = L[0], R[0]
            tag, info = step_end(state, l, r, at_front=True)
            if tag == "blocked":
                tag, info = step_end(state, L[-1], R[-1], at_front=False)
                at_front = False
            else:
                at_front = True
            if tag == "fail":
                return
            if tag == "peel":
                new = (L[1:], R[1:]) if at_front else (L[:-1], R[:-1])
                state = _State([new] + rest, state.binding, state.narrowing)
                continue
            if tag == "descend":
                if at_front:
                    lp, rp = L[0], R[0]
                    new = [(items(lp.body), items(rp.body)), (L[1:], R[1:])]
                else:
                    lp, rp = L[-1], R[-1]
                    new = [(items(lp.body), items(rp.body)), (L[:-1], R[:-1])]
                state = _State(new + rest, state.binding, state.narrowing)
                continue
            if tag == "narrow":
                state = _apply_step(state, info, to_params=True)
                continue
            if tag == "bind":
                state = _apply_step(state, info, to_params=False)
                continue
            if tag == "narrow_bind":
                nar, bnd = info
                state = _apply_step(state, nar, to_params=True)
                state = _apply_step(state, bnd, to_params=False)
                continue
            if tag == "split":
                var, alts = info
                # before case-splitting a parameter, give the refuter a shot
                # at the parameter-only equations accumulated so far
                pure = [
                    (seq(ls), seq(rs))
                    for ls, rs in state.eqs
                    if _no_flex(ls, flex) and _no_flex(rs, flex)
                ]
                if pure and isinstance(nosol(pure), NoSolution):
                    return
                split(state, var, alts)
                return
            # blocked at both ends: closing moves
            open_l = [v for v in L if isinstance(v, Var) and v in flex and v.kind == "e"]
            if len(L) == 1 and open_l:
                state = _apply_step(state, {L[0]: seq(R)}, to_params=False)
                continue
            if _no_flex(L, flex) and _no_flex(R, flex):
                if L == R:
                    state = _State(rest, state.binding, state.narrowing)
                    continue
                out = nosol([(seq(L), seq(R))])
                if isinstance(out, NoSolution):
                    return
                saw_unknown[0] = True
                return
            saw_unknown[0] = True
            return

    go(_State(eqs0, {}, {}))
    if saw_unknown[0]:
        return Unknown("equation outside the supported class")
    if not branches:
        return NoSolution("no instance of the configuration matches")
    return Solutions(tuple(branches))


# ---------------------------------------------------------------------------
# Parameter-only word equations: exact letter-count refutation


@dataclass(frozen=True)
class LinearCertificate:
    """Why a word equation has no solutions, in letter-count terms."""

    kind: str  # 'infeasible' | 'instantiation'
    detail: str


def _collect_counts(
    its: tuple[Term, ...], alphabet: tuple[str, ...]
) -> tuple[dict[str, int], dict[Var, int]]:
    fixed = {c: 0 for c in alphabet}
    fixed["()"] = 0
    mults: dict[Var, int] = {}
    for it in its:
        if isinstance(it, Char):
            if it.ch not in fixed:
                fixed[it.ch] = 0
            fixed[it.ch] += 1
        elif isinstance(it, Paren):
            fixed["()"] += 1
        elif isinstance(it, Var):
            mults[it] = mults.get(it, 0) + 1
        else:
            raise ValueError("not a passive item: %r" % (it,))
    return fixed, mults


def _gauss(rows: list[list[Fraction]]) -> tuple[str, list[list[Fraction]]]:
    """Row-reduce [A | b]; returns ('infeasible', _) on 0 = c contradictions."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) - 1 if rows else 0
    pivot_rows: list[list[Fraction]] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        inv = Fraction(1, 1) / prow[c]
        rows[r] = [x * inv for x in prow]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    for row in rows[r:]:
        if any(x != 0 for x in row[:-1]):
            continue
        if row[-1] != 0:
            return "infeasible", rows
    return "ok", rows[:r]


def _bounds(
    eqs: list[tuple[list[int], int]], nvars: int, cap: int = 10_000
) -> list[int] | None:
    """Upper bounds for nonnegative integer solutions by interval propagation.
    Returns None if some variable stays unbounded."""
    ub = [cap + 1] * nvars
    changed = True
    while changed:
        changed = False
        for coeffs, rhs in eqs:
            for j in range(nvars):
                a = coeffs[j]
                if a == 0:
                    continue
                # a*x_j = rhs - sum_{i != j} c_i x_i
                lo_rest = 0
                hi_rest = 0
                unbounded = False
                for i in range(nvars):
                    if i == j or coeffs[i] == 0:
                        continue
                    ci = coeffs[i]
                    if ci > 0:
                        if ub[i] > cap:
                            unbounded = True
                        else:
                            hi_rest += ci * ub[i]
                    else:
                        if ub[i] > cap:
                            unbounded = True
                        else:
                            lo_rest += ci * ub[i]
                if a > 0:
                    # x_j <= (rhs - lo_rest) / a, lo_rest is the most negative sum
                    if unbounded and any(
                        coeffs[i] < 0 and ub[i] > cap
                        for i in range(nvars)
                        if i != j
                    ):
                        continue
                    hi = max((rhs - lo_rest) // a, 0)
                    if hi < ub[j]:
                        ub[j] = hi
                        changed = True
                else:
                    if unbounded and any(
                        coeffs[i] > 0 and ub[i] > cap
                        for i in range(nvars)
                        if i != j
                    ):
                        continue
                    # a < 0 flips the inequality
                    hi = max((rhs - hi_rest) // a, 0)
                    if hi < ub[j]:
                        ub[j] = hi
                        changed = True
    if any(u > cap for u in ub):
        return None
    return ub


def _enumerate_points(
    eqs: list[tuple[list[int], int]], ub: list[int], limit: int
) -> list[tuple[int, ...]] | None:
    pts: list[tuple[int, ...]] = []

    def ok_prefix(xs: list[int], full: bool) -> bool:
        for coeffs, rhs in eqs:
            tot = sum(c * x for c, x in zip(coeffs, xs))
            if full:
                if tot != rhs:
                    return False
            else:
                rest_min = 0
                rest_max = 0
                for i in range(len(xs), len(coeffs)):
                    c = coeffs[i]
                    if c > 0:
                        rest_max += c * ub[i]
                    else:
                        rest_min += c * ub[i]
                if tot + rest_min > rhs or tot + rest_max < rhs:
                    return False
        return True

    def rec(xs: list[int]) -> bool:
        if len(xs) == len(ub):
            if ok_prefix(xs, True):
                pts.append(tuple(xs))
                if len(pts) > limit:
                    return False
            return True
        for v in range(ub[len(xs)] + 1):
            if not rec(xs + [v]):
                return False
        return True

    if not rec([]):
        return None
    return pts


def check_equation_linear(
    left: Term, right: Term, alphabet: Sequence[str] | None = None, limit: int = 64
) -> MatchOutcome:
    """Refute a parameter-only word equation by letter counts, or give up.

    Characters are counted per letter at the top level of each side; every
    parenthesized item counts toward one shared pseudo-letter.  The resulting
    linear system over nonnegative per-parameter letter counts is solved
    exactly; when the solution set is small and paren-free it is instantiated
    and tested, so NoSolution answers are sound proofs.
    """
    lits, rits = items(left), items(right)
    chars = set(c for c in (alphabet or ()))
    for it in itertools.chain(lits, rits):
        if isinstance(it, Char):
            chars.add(it.ch)
    letters = tuple(sorted(chars)) + ("()",)
    lf, lm = _collect_counts(lits, tuple(sorted(chars)))
    rf, rm = _collect_counts(rits, tuple(sorted(chars)))
    params = sorted(set(lm) | set(rm), key=lambda v: (v.kind, v.name))
    if not params:
        return (
            NoSolution("distinct data", LinearCertificate("instantiation", "no parameters"))
            if lits != rits
            else Unknown("identical sides")
        )
    # variables: one per (param, letter); s/t parameters only where legal
    cols: list[tuple[Var, str]] = []
    for p in params:
        for c in letters:
            if p.kind == "s" and c == "()":
                continue
            cols.append((p, c))
    colidx = {pc: i for i, pc in enumerate(cols)}
    eqs: list[tuple[list[int], int]] = []
    for c in letters:
        coeffs = [0] * len(cols)
        for p, mult in lm.items():
            if (p, c) in colidx:
                coeffs[colidx[(p, c)]] += mult
        for p, mult in rm.items():
            if (p, c) in colidx:
                coeffs[colidx[(p, c)]] -= mult
        rhs = rf.get(c, 0) - lf.get(c, 0)
        if any(coeffs) or rhs:
            eqs.append((coeffs, rhs))
    for p in params:
        if p.kind in ("s", "t"):
            coeffs = [0] * len(cols)
            for c in letters:
                if (p, c) in colidx:
                    coeffs[colidx[(p, c)]] = 1
            eqs.append((coeffs, 1))
    rows = [[Fraction(c) for c in coeffs] + [Fraction(rhs)] for coeffs, rhs in eqs]
    if rows:
        status, reduced = _gauss(rows)
        if status == "infeasible":
            return NoSolution(
                "letter counts cannot balance",
                LinearCertificate("infeasible", "linear system has no rational solution"),
            )
        # reject when a fully determined variable is negative or fractional
        for row in reduced:
            support = [i for i, x in enumerate(row[:-1]) if x != 0]
            if len(support) == 1:
                val = row[-1] / row[support[0]]
                if val < 0 or val.denominator != 1:
                    return NoSolution(
                        "letter counts force an impossible value",
                        LinearCertificate(
                            "infeasible", "a count would be negative or fractional"
                        ),
                    )
    ub = _bounds(eqs, len(cols))
    if ub is None:
        return Unknown("letter counts leave the solution set unbounded")
    pts = _enumerate_points(eqs, ub, limit)
    if pts is None:
        return Unknown("too many count solutions to test")
    words_per_pt: list[list[dict[Var, Term]]] = []
    total = 0
    for pt in pts:
        per_param: list[tuple[Var, list[Term]]] = []
        feasible = True
        for p in params:
            cnt = {c: pt[colidx[(p, c)]] for c in letters if (p, c) in colidx}
            if cnt.get("()", 0) > 0:
                return Unknown("a parameter would need parenthesized content")
            ms: list[str] = []
            for c in letters[:-1]:
                ms.extend([c] * cnt.get(c, 0))
            perms = sorted(set(itertools.permutations(ms)))
            per_param.append((p, [seq(Char(c) for c in w) for w in perms]))
        combo = 1
        for _, ws in per_param:
            combo *= len(ws)
        total += combo
        if total > limit:
            return Unknown("too many candidate instantiations")
        assigns = []
        for choice in itertools.product(*[ws for _, ws in per_param]):
            assigns.append({p: w for (p, _), w in zip(per_param, choice)})
        words_per_pt.append(assigns)
    for assigns in words_per_pt:
        for a in assigns:
            s = Subst(a, validate=False)
            if apply(s, left) == apply(s, right):
                return Unknown("the equation has a solution")
    return NoSolution(
        "every count-compatible instantiation fails",
        LinearCertificate(
            "instantiation",
            "%d candidate assignments all tested unequal" % sum(map(len, words_per_pt)),
        ),
    )


def check_equations(
    equations: list[tuple[Term, Term]], alphabet: Sequence[str] | None
) -> MatchOutcome:
    """Refute a conjunction of parameter-only equations (any one suffices)."""
    verdicts = []
    for left, right in equations:
        out = check_equation_linear(left, right, alphabet)
        if isinstance(out, NoSolution):
            return out
        verdicts.append(out)
    return Unknown("; ".join(v.reason for v in verdicts) or "nothing to refute")


def prove_unsolvable(
    equations: list[tuple[Term, Term]],
    alphabet: Sequence[str] | None = None,
    model_budget: "object | None" = None,
) -> MatchOutcome:
    """Refute parameter-only word equations.

    Tries exact letter-count arithmetic first; when that is inconclusive and a
    model-search budget is supplied, asks the finite-model finder to refute
    the existential closure of the conjunction over the data domain.
    """
    out = check_equations(equations, alphabet)
    if isinstance(out, NoSolution) or model_budget is None:
        return out
    from . import finder, fol

    theory = fol.equations_goal_theory(equations, alphabet or ())
    res = finder.find_model(theory, model_budget)
    if res.model is not None:
        return NoSolution("a finite model falsifies the equations", res.model)
    return Unknown("%s; model search: %s" % (out.reason, res.reason))
