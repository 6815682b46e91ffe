"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: exhaustive enumeration instead of
search, plain breadth-first exploration instead of symbolic driving.  The
tests compare the package against these, never the other way around.
"""

from __future__ import annotations

import itertools
from random import Random

from superfcm.syntax import Program
from superfcm.terms import (
    Call,
    Char,
    Paren,
    Subst,
    Term,
    Var,
    apply,
    items,
    seq,
)


def fib_words(n: int) -> list[str]:
    """The word sequence b, a, ba, aba, baaba, ... (each word is the
    concatenation of its two predecessors)."""
    ws = ["b", "a"]
    while len(ws) <= n:
        ws.append(ws[-2] + ws[-1])
    return ws[: n + 1]


# ---------------------------------------------------------------------------
# Exhaustive associative matching

def _pattern_items(ps: list[Term], vs: list[Term], binding: dict):
    """Yield all bindings matching pattern items against value items."""
    if not ps:
        if not vs:
            yield binding
        return
    p, rest = ps[0], ps[1:]
    if isinstance(p, Char):
        if vs and vs[0] == p:
            yield from _pattern_items(rest, vs[1:], binding)
        return
    if isinstance(p, Paren):
        if vs and isinstance(vs[0], Paren):
            for b in _pattern_items(
                list(items(p.body)), list(items(vs[0].body)), binding
            ):
                yield from _pattern_items(rest, vs[1:], b)
        return
    if isinstance(p, Var):
        if p in binding:
            want = list(items(binding[p]))
            if vs[: len(want)] == want:
                yield from _pattern_items(rest, vs[len(want):], binding)
            return
        if p.kind == "s":
            if vs and isinstance(vs[0], Char):
                b = dict(binding)
                b[p] = vs[0]
                yield from _pattern_items(rest, vs[1:], b)
            return
        if p.kind == "t":
            if vs:
                b = dict(binding)
                b[p] = vs[0]
                yield from _pattern_items(rest, vs[1:], b)
            return
        for k in range(len(vs) + 1):
            b = dict(binding)
            b[p] = seq(vs[:k])
            yield from _pattern_items(rest, vs[k:], b)
        return
    raise ValueError("not a passive pattern: %r" % (p,))


def _evar_order(patterns: list[Term]) -> list[Var]:
    """e-variables in leftmost-occurrence order across all patterns."""
    out: list[Var] = []

    def walk(t: Term) -> None:
        for it in items(t):
            if isinstance(it, Var) and it.kind == "e" and it not in out:
                out.append(it)
            elif isinstance(it, Paren):
                walk(it.body)

    for p in patterns:
        walk(p)
    return out


def all_matches(patterns: list[Term], values: list[Term]) -> list[dict]:
    """Every substitution matching the patterns, in leftmost-shortest order."""
    assert len(patterns) == len(values)
    sols = [{}]
    for p, v in zip(patterns, values):
        nxt = []
        for b in sols:
            nxt.extend(_pattern_items(list(items(p)), list(items(v)), b))
        sols = nxt
    order = _evar_order(patterns)
    sols.sort(key=lambda b: tuple(len(list(items(b[v]))) for v in order if v in b))
    return sols


# ---------------------------------------------------------------------------
# Non-deterministic rewriting, explored breadth-first

def _find_call(t: Term):
    """Leftmost-innermost call in t, as (call, replace) or None."""
    if isinstance(t, Call):
        for a in t.args:
            got = _find_call(a)
            if got is not None:
                return got
        return t
    for it in items(t):
        if isinstance(it, Paren):
            got = _find_call(it.body)
            if got is not None:
                return got
        elif isinstance(it, Call):
            got = _find_call(it)
            if got is not None:
                return got
    return None


def _replace_call(t: Term, call: Call, rep: Term) -> Term:
    if t is call:
        return rep
    if isinstance(t, Call):
        return Call(t.fn, tuple(_replace_call(a, call, rep) for a in t.args))
    out = []
    for it in items(t):
        if it is call:
            out.append(rep)
        elif isinstance(it, Paren):
            out.append(Paren(_replace_call(it.body, call, rep)))
        elif isinstance(it, Call):
            out.append(_replace_call(it, call, rep))
        else:
            out.append(it)
    return seq(out)


def nd_successors(p: Program, state: Term) -> list[Term]:
    """All one-step successors under unordered (non-deterministic) rewriting."""
    call = _find_call(state)
    if call is None:
        return []
    out = []
    for r in p.rules_for(call.fn):
        for b in all_matches(list(r.params), list(call.args)):
            s = Subst(b, validate=False)
            out.append(_replace_call(state, call, apply(s, r.rhs)))
    return out


def nd_reachable(p: Program, start: Term, depth: int):
    """All states reachable from start within the given depth, with the rule
    firings seen along the way as (state, rule) pairs."""
    seen = {start}
    firings = set()
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for st in frontier:
            call = _find_call(st)
            if call is None:
                continue
            for r in p.rules_for(call.fn):
                for b in all_matches(list(r.params), list(call.args)):
                    s = Subst(b, validate=False)
                    firings.add((st, r.index))
                    new = _replace_call(st, call, apply(s, r.rhs))
                    if new not in seen:
                        seen.add(new)
                        nxt.append(new)
        frontier = nxt
        if not frontier:
            break
    return seen, firings


# ---------------------------------------------------------------------------
# Random data

def random_word(rng: Random, alphabet: str, max_len: int) -> Term:
    n = rng.randrange(max_len + 1)
    return seq([Char(rng.choice(alphabet)) for _ in range(n)])


def random_object_term(rng: Random, alphabet: str, max_items: int, depth: int = 2) -> Term:
    n = rng.randrange(max_items + 1)
    out = []
    for _ in range(n):
        if depth > 0 and rng.random() < 0.2:
            out.append(Paren(random_object_term(rng, alphabet, max_items - 1, depth - 1)))
        else:
            out.append(Char(rng.choice(alphabet)))
    return seq(out)


def random_pattern(rng: Random, alphabet: str, names: itertools.count) -> Term:
    """A random passive pattern over fresh variables and the alphabet."""
    out = []
    for _ in range(rng.randrange(4)):
        roll = rng.random()
        if roll < 0.35:
            out.append(Char(rng.choice(alphabet)))
        elif roll < 0.65:
            out.append(Var("e", "v%d" % next(names)))
        elif roll < 0.8:
            out.append(Var("s", "v%d" % next(names)))
        elif roll < 0.9:
            out.append(Var("t", "v%d" % next(names)))
        else:
            out.append(Paren(Var("e", "v%d" % next(names))))
    return seq(out)


def random_flat_program(rng: Random, alphabet: str = "ab") -> Program:
    """A random program in flat tail form: every right-hand side is passive
    or a single call on passive arguments built from pattern variables."""
    fn_count = rng.randrange(1, 3)
    fns = ["F%d" % i for i in range(fn_count)]
    arity = {f: rng.randrange(1, 3) for f in fns}
    names = itertools.count()
    rules = []
    for f in fns:
        for _ in range(rng.randrange(1, 4)):
            params = tuple(
                random_pattern(rng, alphabet, names) for _ in range(arity[f])
            )
            pool = [
                v
                for pat in params
                for v in _pattern_vars(pat)
            ]
            if rng.random() < 0.45 or not fns:
                rules.append((Call(f, params), _random_passive(rng, alphabet, pool)))
            else:
                g = rng.choice(fns)
                args = tuple(
                    _random_passive(rng, alphabet, pool) for _ in range(arity[g])
                )
                rules.append((Call(f, params), Call(g, args)))
    init = Call(
        fns[0],
        tuple(Var("e", "n%d" % i) for i in range(arity[fns[0]])),
    )
    return Program(init, rules)


def _pattern_vars(t: Term) -> list[Var]:
    out = []
    for it in items(t):
        if isinstance(it, Var):
            out.append(it)
        elif isinstance(it, Paren):
            out.extend(_pattern_vars(it.body))
    return out


def _random_passive(rng: Random, alphabet: str, pool: list[Var]) -> Term:
    out = []
    for _ in range(rng.randrange(4)):
        roll = rng.random()
        if roll < 0.4 and pool:
            out.append(rng.choice(pool))
        elif roll < 0.85:
            out.append(Char(rng.choice(alphabet)))
        elif pool:
            out.append(Paren(rng.choice(pool)))
        else:
            out.append(Char(rng.choice(alphabet)))
    return seq(out)
