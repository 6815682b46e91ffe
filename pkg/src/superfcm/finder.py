"""Finite countermodel search for reachability theories.

A candidate model fixes the unit as element 0 and one distinct element per
character, then searches the free cells of the concatenation table and the
parenthesis function by depth-first search.  Associativity is enforced
incrementally: each assignment triggers unit propagation over the affected
triples through an index of cells by value.  Element symmetry is broken by
the least-number heuristic: a fresh element may enter the table only as the
successor of the largest element used so far.

Predicates are not searched.  The axioms produced by the encoder are Horn
clauses, so over fixed operation tables the least predicate tables satisfy
them, and a positive existential goal is false in some satisfying model
exactly when it is false in the least one.  The search therefore computes
predicates as a least fixpoint (a semi-naive chase) and prunes any branch
whose partial tables already force the goal, which is sound because facts
only grow as cells are filled.

Sizes are explored round-robin with geometrically growing node budgets, so a
cheap refutation at a larger size is not starved by an expensive exhaustive
pass at a smaller one.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .fol import (
    And,
    Eq,
    Exists,
    FOTheory,
    Forall,
    Formula,
    Implies,
    MonoidAxiom,
    Not,
    Or,
    Pred,
)
from .terms import Char, Concat, Empty, Paren, Term, Var, items
from .terms import subterms as _term_subterms


class SearchError(Exception):
    pass


@dataclass
class SearchBudget:
    """Limits for a model search."""

    min_size: int = 2
    max_size: int = 16
    deadline: float | None = 120.0
    start_nodes: int = 600
    growth: int = 8


@dataclass(frozen=True)
class FiniteModel:
    """A finite interpretation of the data signature.

    Element 0 interprets the empty sequence; `chars` maps each character to
    its element.  `concat` is the full operation table, `beta` the table of
    the parenthesis constructor, and `preds` maps predicate names to their
    sets of true tuples.
    """

    size: int
    chars: dict[str, int]
    concat: tuple[tuple[int, ...], ...]
    beta: tuple[int, ...]
    preds: dict[str, frozenset[tuple[int, ...]]]

    def to_json(self) -> dict:
        return {
            "kind": "model",
            "size": self.size,
            "empty": 0,
            "chars": dict(self.chars),
            "concat": [list(row) for row in self.concat],
            "beta": list(self.beta),
            "predicates": {
                name: sorted(list(t) for t in table)
                for name, table in self.preds.items()
            },
        }

    @staticmethod
    def from_json(data: dict) -> "FiniteModel":
        if data.get("kind") != "model":
            raise ValueError("not a model object")
        return FiniteModel(
            size=data["size"],
            chars={k: int(v) for k, v in data["chars"].items()},
            concat=tuple(tuple(row) for row in data["concat"]),
            beta=tuple(data["beta"]),
            preds={
                name: frozenset(tuple(t) for t in table)
                for name, table in data["predicates"].items()
            },
        )


@dataclass
class FindResult:
    status: str  # "model", "deadline" or "exhausted"
    reason: str
    model: FiniteModel | None = None
    size: int | None = None


class DeadlineExceeded(Exception):
    pass


class _Budget(Exception):
    pass


# ---------------------------------------------------------------------------
# Term and formula evaluation over tables


def eval_term(model: FiniteModel, t: Term, env: dict[Var, int] | None = None) -> int:
    """The element denoted by a ground passive term (variables via env)."""
    v = _eval_term(t, env or {}, model.concat, model.beta, model.chars)
    if v is None:
        raise SearchError("term mentions an unknown character or variable")
    return v


def _eval_term(t, env, concat, beta, chars):
    if isinstance(t, Empty):
        return 0
    if isinstance(t, Char):
        return chars.get(t.ch)
    if isinstance(t, Var):
        return env.get(t)
    if isinstance(t, Paren):
        v = _eval_term(t.body, env, concat, beta, chars)
        if v is None:
            return None
        return beta[v]
    if isinstance(t, Concat):
        acc = None
        for it in t.items:
            v = _eval_term(it, env, concat, beta, chars)
            if v is None:
                return None
            if acc is None:
                acc = v
            else:
                acc = concat[acc][v]
                if acc is None:
                    return None
        return acc
    raise SearchError("cannot evaluate %r in a model" % (t,))


def _eval_formula(f, env, tab, facts, exact):
    """Three-valued evaluation; None means undetermined on partial tables.

    In exact mode absent predicate tuples are definitely false; otherwise
    they are undetermined, which keeps pruning on growing fact sets sound.
    """
    if isinstance(f, MonoidAxiom):
        return True
    if isinstance(f, Eq):
        l = _eval_term(f.left, env, tab.concat, tab.beta, tab.chars)
        r = _eval_term(f.right, env, tab.concat, tab.beta, tab.chars)
        if l is None or r is None:
            return None
        return l == r
    if isinstance(f, Pred):
        args = []
        for a in f.args:
            v = _eval_term(a, env, tab.concat, tab.beta, tab.chars)
            if v is None:
                return None
            args.append(v)
        if tuple(args) in facts.get(f.name, ()):
            return True
        return False if exact else None
    if isinstance(f, Not):
        v = _eval_formula(f.body, env, tab, facts, exact)
        return None if v is None else not v
    if isinstance(f, And):
        out = True
        for p in f.parts:
            v = _eval_formula(p, env, tab, facts, exact)
            if v is False:
                return False
            if v is None:
                out = None
        return out
    if isinstance(f, Or):
        out = False
        for p in f.parts:
            v = _eval_formula(p, env, tab, facts, exact)
            if v is True:
                return True
            if v is None:
                out = None
        return out
    if isinstance(f, Implies):
        l = _eval_formula(f.left, env, tab, facts, exact)
        if l is False:
            return True
        r = _eval_formula(f.right, env, tab, facts, exact)
        if r is True:
            return True
        if l is None or r is None:
            return None
        return r
    if isinstance(f, (Forall, Exists)):
        want_all = isinstance(f, Forall)
        out = want_all
        for point in _assignments(f.vars, tab.n):
            env2 = dict(env)
            env2.update(point)
            v = _eval_formula(f.body, env2, tab, facts, exact)
            if v is None:
                out = None
            elif want_all and not v:
                return False
            elif not want_all and v:
                return True
        return out
    raise SearchError("cannot evaluate %r" % (f,))


def _assignments(vs: Sequence[Var], n: int) -> Iterator[dict[Var, int]]:
    if not vs:
        yield {}
        return
    head, rest = vs[0], vs[1:]
    for v in range(n):
        for tail in _assignments(rest, n):
            tail[head] = v
            yield tail


# ---------------------------------------------------------------------------
# Clause form and the chase


@dataclass
class _Clause:
    body: list[tuple[str, tuple[Term, ...]]]
    side: Formula | None
    head_name: str
    head_args: tuple[Term, ...]
    vars: tuple[Var, ...]


def _flatten_and(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        out = []
        for p in f.parts:
            out.extend(_flatten_and(p))
        return out
    return [f]


def _classify(th: FOTheory):
    """Split axioms into native laws, Horn clauses and leftover constraints."""
    clauses: list[_Clause] = []
    general: list[Formula] = []
    for ax in th.axioms:
        if isinstance(ax, MonoidAxiom):
            continue
        f = ax
        vs: tuple[Var, ...] = ()
        while isinstance(f, Forall):
            vs = vs + f.vars
            f = f.body
        guard_parts: list[Formula] = []
        while isinstance(f, Implies):
            guard_parts.append(f.left)
            f = f.right
        guard = And(tuple(guard_parts)) if guard_parts else None
        heads = _flatten_and(f)
        if not all(isinstance(h, Pred) for h in heads):
            ok = False
        else:
            ok = True
        body: list[tuple[str, tuple[Term, ...]]] = []
        side_parts: list[Formula] = []
        if ok and guard is not None:
            for part in _flatten_and(guard):
                if isinstance(part, Pred):
                    body.append((part.name, part.args))
                elif isinstance(part, (Eq, Or, Exists, Not)):
                    side_parts.append(part)
                else:
                    ok = False
                    break
        if not ok:
            general.append(ax)
            continue
        side = And(tuple(side_parts)) if side_parts else None
        for h in heads:
            clauses.append(_Clause(body, side, h.name, h.args, vs))
    return clauses, general


def _all_distinct_consts(f: Formula) -> bool:
    """Recognize the constant-distinctness conjunction, which the search
    satisfies by construction (fixed injective constant assignment)."""
    for part in _flatten_and(f):
        if not (isinstance(part, Not) and isinstance(part.body, Eq)):
            return False
        eq = part.body
        if not all(isinstance(t, (Empty, Char)) for t in (eq.left, eq.right)):
            return False
    return True


class _Tables:
    """Operation tables with indexes of cells by value."""

    def __init__(self, n: int, chars: dict[str, int]):
        self.n = n
        self.chars = chars
        self.concat: list[list[int | None]] = [[None] * n for _ in range(n)]
        self.beta: list[int | None] = [None] * n
        self.occ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.bocc: list[list[int]] = [[] for _ in range(n)]
        for x in range(n):
            self._set_unit(0, x, x)
            if x:
                self._set_unit(x, 0, x)

    def _set_unit(self, i: int, j: int, v: int) -> None:
        self.concat[i][j] = v
        self.occ[v].append((i, j))

    @staticmethod
    def from_model(m: FiniteModel) -> "_Tables":
        t = _Tables.__new__(_Tables)
        t.n = m.size
        t.chars = m.chars
        t.concat = [list(row) for row in m.concat]
        t.beta = list(m.beta)
        t.occ = [[] for _ in range(m.size)]
        t.bocc = [[] for _ in range(m.size)]
        for i in range(m.size):
            for j in range(m.size):
                t.occ[m.concat[i][j]].append((i, j))
        for i in range(m.size):
            t.bocc[m.beta[i]].append(i)
        return t


def _solve_term(pat: Term, value: int, env: dict, tab: _Tables) -> Iterator[dict]:
    if isinstance(pat, Empty):
        if value == 0:
            yield env
        return
    yield from _solve_items(items(pat), value, env, tab)


def _solve_items(its: tuple[Term, ...], value: int, env: dict, tab: _Tables):
    if not its:
        if value == 0:
            yield env
        return
    if len(its) == 1:
        yield from _solve_single(its[0], value, env, tab)
        return
    for (v1, v2) in list(tab.occ[value]):
        for env1 in _solve_single(its[0], v1, env, tab):
            yield from _solve_items(its[1:], v2, env1, tab)


def _solve_single(it: Term, value: int, env: dict, tab: _Tables):
    if isinstance(it, Char):
        if tab.chars.get(it.ch) == value:
            yield env
        return
    if isinstance(it, Var):
        bound = env.get(it)
        if bound is not None:
            if bound == value:
                yield env
            return
        env2 = dict(env)
        env2[it] = value
        yield env2
        return
    if isinstance(it, Paren):
        for x in list(tab.bocc[value]):
            yield from _solve_term(it.body, x, env, tab)
        return
    if isinstance(it, Empty):
        if value == 0:
            yield env
        return
    raise SearchError("cannot solve against %r" % (it,))


def _chase(tab: _Tables, clauses: list[_Clause], pred_names) -> dict[str, set]:
    """Least fixpoint of the Horn clauses over the (possibly partial) tables."""
    facts: dict[str, set] = {name: set() for name in pred_names}
    queue: list[tuple[str, tuple[int, ...]]] = []

    def add(name: str, tup: tuple[int, ...]) -> None:
        table = facts.setdefault(name, set())
        if tup not in table:
            table.add(tup)
            queue.append((name, tup))

    by_pred: dict[str, list[tuple[_Clause, int]]] = {}
    for cl in clauses:
        for i, (name, _) in enumerate(cl.body):
            by_pred.setdefault(name, []).append((cl, i))

    def fire(cl: _Clause, env: dict, skip: int) -> None:
        envs = [env]
        for i, (name, pats) in enumerate(cl.body):
            if i == skip:
                continue
            nxt: list[dict] = []
            for e in envs:
                for fact in list(facts.get(name, ())):
                    if len(fact) != len(pats):
                        continue
                    got = [e]
                    okall = True
                    for pat, val in zip(pats, fact):
                        step: list[dict] = []
                        for g in got:
                            step.extend(_solve_term(pat, val, g, tab))
                        got = step
                        if not got:
                            okall = False
                            break
                    if okall:
                        nxt.extend(got)
            envs = nxt
            if not envs:
                return
        for e in envs:
            free = [v for v in cl.vars if v not in e]
            for point in _assignments(free, tab.n):
                e2 = dict(e)
                e2.update(point)
                if cl.side is not None:
                    if _eval_formula(cl.side, e2, tab, facts, False) is not True:
                        continue
                out = []
                for a in cl.head_args:
                    v = _eval_term(a, e2, tab.concat, tab.beta, tab.chars)
                    if v is None:
                        break
                    out.append(v)
                else:
                    add(cl.head_name, tuple(out))

    for cl in clauses:
        if not cl.body:
            fire(cl, {}, -1)
    while queue:
        name, tup = queue.pop()
        for cl, i in by_pred.get(name, ()):
            pats = cl.body[i][1]
            if len(tup) != len(pats):
                continue
            envs = [{}]
            for pat, val in zip(pats, tup):
                step = []
                for e in envs:
                    step.extend(_solve_term(pat, val, e, tab))
                envs = step
                if not envs:
                    break
            for e in envs:
                fire(cl, e, i)
    return facts


def _positive(f: Formula) -> bool:
    if isinstance(f, (Eq, Pred)):
        return True
    if isinstance(f, (And, Or)):
        return all(_positive(p) for p in f.parts)
    if isinstance(f, Exists):
        return _positive(f.body)
    return False


def _mentions_paren(f: Formula) -> bool:
    def term_has(t: Term) -> bool:
        return any(isinstance(s, Paren) for s in _term_subterms(t))

    if isinstance(f, Eq):
        return term_has(f.left) or term_has(f.right)
    if isinstance(f, Pred):
        return any(term_has(a) for a in f.args)
    if isinstance(f, Not):
        return _mentions_paren(f.body)
    if isinstance(f, (And, Or)):
        return any(_mentions_paren(p) for p in f.parts)
    if isinstance(f, Implies):
        return _mentions_paren(f.left) or _mentions_paren(f.right)
    if isinstance(f, (Forall, Exists)):
        return _mentions_paren(f.body)
    return False


# ---------------------------------------------------------------------------
# Specialized evaluators
#
# The generic chase and goal evaluation dominate the search, so for the
# common clause and goal shapes they are compiled once per theory into plain
# Python loops over the tables (character constants become literals, fact
# sets become locals).  Anything outside the supported shapes falls back to
# the generic code.


class _CodegenUnsupported(Exception):
    pass


class _W:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0
        self.counter = 0

    def line(self, s: str) -> None:
        self.lines.append("    " * self.depth + s)

    def push(self, s: str) -> None:
        self.line(s)
        self.depth += 1

    def tmp(self, stem: str = "t") -> str:
        self.counter += 1
        return "_%s%d" % (stem, self.counter)


class _Compiler:
    def __init__(self, th: FOTheory, clauses: list[_Clause]):
        self.th = th
        self.clauses = clauses
        self.const = {c: i + 1 for i, c in enumerate(th.alphabet)}
        names = set(th.predicates)
        for cl in clauses:
            names.add(cl.head_name)
            for nm, _ in cl.body:
                names.add(nm)
        self.preds = sorted(names)
        self.pid = {name: i for i, name in enumerate(self.preds)}
        self.fvar = {name: "F%d" % i for i, name in enumerate(self.preds)}
        self.avar = {name: "add%d" % i for i, name in enumerate(self.preds)}

    # -- term patterns

    def _cid(self, ch: str) -> int:
        got = self.const.get(ch)
        if got is None:
            raise _CodegenUnsupported("character %r outside the alphabet" % ch)
        return got

    def emit_value(self, t: Term, env: dict, w: _W) -> str:
        if isinstance(t, Empty):
            return "0"
        if isinstance(t, Char):
            return str(self._cid(t.ch))
        if isinstance(t, Var):
            got = env.get(t)
            if got is None:
                raise _CodegenUnsupported("unbound variable in value position")
            return got
        if isinstance(t, Paren):
            inner = self.emit_value(t.body, env, w)
            tmp = w.tmp()
            w.line("%s = beta[%s]" % (tmp, inner))
            w.push("if %s is not None:" % tmp)
            return tmp
        if isinstance(t, Concat):
            acc = None
            for it in t.items:
                e = self.emit_value(it, env, w)
                if acc is None:
                    acc = e
                else:
                    tmp = w.tmp()
                    w.line("%s = concat[%s][%s]" % (tmp, acc, e))
                    w.push("if %s is not None:" % tmp)
                    acc = tmp
            return acc if acc is not None else "0"
        raise _CodegenUnsupported("cannot compile term %r" % (t,))

    def emit_solve_term(self, t: Term, val: str, env: dict, w: _W) -> None:
        self.emit_solve_items(items(t), val, env, w)

    def emit_solve_items(self, its, val: str, env: dict, w: _W) -> None:
        if not its:
            w.push("if %s == 0:" % val)
            return
        if len(its) == 1:
            self.emit_solve_item(its[0], val, env, w)
            return
        s1, s2 = w.tmp("s"), w.tmp("s")
        w.push("for %s, %s in occ[%s]:" % (s1, s2, val))
        self.emit_solve_item(its[0], s1, env, w)
        self.emit_solve_items(its[1:], s2, env, w)

    def emit_solve_item(self, it: Term, val: str, env: dict, w: _W) -> None:
        if isinstance(it, (Char, Empty)):
            w.push("if %s == %s:" % (val, self.emit_value(it, env, w)))
            return
        if isinstance(it, Var):
            got = env.get(it)
            if got is not None:
                w.push("if %s == %s:" % (val, got))
                return
            name = w.tmp("v")
            w.line("%s = %s" % (name, val))
            env[it] = name
            return
        if isinstance(it, Paren):
            x = w.tmp("p")
            w.push("for %s in bocc[%s]:" % (x, val))
            self.emit_solve_term(it.body, x, env, w)
            return
        raise _CodegenUnsupported("cannot compile pattern %r" % (it,))

    # -- clause firing functions

    def _pat_vars(self, pats) -> set:
        out: set = set()
        for p in pats:
            for s in _term_subterms(p):
                if isinstance(s, Var):
                    out.add(s)
        return out

    def emit_body_atom(self, bname: str, bpats, env: dict, w: _W) -> None:
        if self._pat_vars(bpats) <= set(env):
            vals = [self.emit_value(p, env, w) for p in bpats]
            tup = "(%s,)" % ", ".join(vals) if vals else "()"
            w.push("if %s in %s:" % (tup, self.fvar[bname]))
            return
        fv = w.tmp("g")
        w.push("for %s in list(%s):" % (fv, self.fvar[bname]))
        bcomps = [w.tmp("f") for _ in bpats]
        if len(bcomps) == 1:
            w.line("%s, = %s" % (bcomps[0], fv))
        else:
            w.line("%s = %s" % (", ".join(bcomps), fv))
        for pat, comp in zip(bpats, bcomps):
            self.emit_solve_term(pat, comp, env, w)

    def emit_fire(self, w: _W, fname: str, cl: _Clause, pos: int) -> None:
        if cl.side is not None:
            raise _CodegenUnsupported("side conditions")
        params = ["fact", "n", "concat", "beta", "occ", "bocc"]
        params += [self.fvar[p] for p in self.preds]
        params += [self.avar[p] for p in self.preds]
        w.push("def %s(%s):" % (fname, ", ".join(params)))
        env: dict = {}
        name, pats = cl.body[pos]
        comps = [w.tmp("f") for _ in pats]
        if len(comps) == 1:
            w.line("%s, = fact" % comps[0])
        else:
            w.line("%s = fact" % ", ".join(comps))
        for pat, comp in zip(pats, comps):
            self.emit_solve_term(pat, comp, env, w)
        remaining = [cl.body[i] for i in range(len(cl.body)) if i != pos]
        while remaining:
            # bound atoms become membership tests; otherwise join through
            # the atom that shares the most variables with the bindings so
            # far, preferring the derived predicates over the small guard
            # predicate to keep the loops fact-driven
            pick = None
            for k, (bname, bpats) in enumerate(remaining):
                if self._pat_vars(bpats) <= set(env):
                    pick = k
                    break
            if pick is None:
                def score(atom):
                    bname, bpats = atom
                    vs = self._pat_vars(bpats)
                    return (len(vs & set(env)), bname != "R")
                pick = max(range(len(remaining)), key=lambda k: score(remaining[k]))
            bname, bpats = remaining.pop(pick)
            self.emit_body_atom(bname, bpats, env, w)
        for v in cl.vars:
            if v not in env:
                raise _CodegenUnsupported("variable outside every body atom")
        args = [self.emit_value(a, env, w) for a in cl.head_args]
        tup = "(%s,)" % ", ".join(args) if args else "()"
        w.line("%s(%s)" % (self.avar[cl.head_name], tup))
        w.depth = 0
        w.line("")

    # -- the chase drivers

    def _clause_uses_beta(self, cl: _Clause) -> bool:
        ts = list(cl.head_args)
        for _, pats in cl.body:
            ts.extend(pats)
        return any(
            isinstance(s, Paren) for t in ts for s in _term_subterms(t)
        )

    def _emit_adders(self, w: _W) -> None:
        w.line("pending = []")
        for name in self.preds:
            w.push(
                "def %s(t, _F=%s, _p=%d):"
                % (self.avar[name], self.fvar[name], self.pid[name])
            )
            w.push("if t not in _F:")
            w.line("_F.add(t)")
            w.line("pending.append((_p, t))")
            w.depth -= 2

    def _emit_loop(self, w: _W, fire_names: dict[int, list[str]]) -> None:
        callargs = ", ".join(
            ["n", "concat", "beta", "occ", "bocc"]
            + [self.fvar[p] for p in self.preds]
            + [self.avar[p] for p in self.preds]
        )
        base = w.depth
        w.push("while pending:")
        w.line("pid, fact = pending.pop()")
        first = True
        for pid in sorted(fire_names):
            kw = "if" if first else "elif"
            first = False
            w.push("%s pid == %d:" % (kw, pid))
            for fname in fire_names[pid]:
                w.line("%s(fact, %s)" % (fname, callargs))
            w.depth -= 1
        w.depth = base
        w.line("return {%s}" % ", ".join(
            "%r: %s" % (name, self.fvar[name]) for name in self.preds
        ))

    def compile_chase(self):
        w = _W()
        fire_names: dict[int, list[str]] = {}
        grounds: list[_Clause] = []
        beta_refires: list[tuple[str, str]] = []
        for k, cl in enumerate(self.clauses):
            if not cl.body:
                if cl.vars:
                    raise _CodegenUnsupported("quantified bodiless clause")
                grounds.append(cl)
                continue
            uses_beta = self._clause_uses_beta(cl)
            for pos, (bname, _) in enumerate(cl.body):
                fname = "_fire_%d_%d" % (k, pos)
                self.emit_fire(w, fname, cl, pos)
                fire_names.setdefault(self.pid[bname], []).append(fname)
                if uses_beta and pos == 0:
                    beta_refires.append((fname, self.fvar[bname]))
        if any(self._clause_uses_beta(cl) for cl in grounds):
            raise _CodegenUnsupported("ground fact mentioning the wrapper")

        w.push("def _chase(n, concat, beta, occ, bocc):")
        for name in self.preds:
            w.line("%s = set()" % self.fvar[name])
        self._emit_adders(w)
        base = w.depth
        for cl in grounds:
            env: dict = {}
            args = [self.emit_value(a, env, w) for a in cl.head_args]
            tup = "(%s,)" % ", ".join(args) if args else "()"
            w.line("%s(%s)" % (self.avar[cl.head_name], tup))
            w.depth = base
        self._emit_loop(w, fire_names)
        w.depth = 0
        w.line("")

        # restart from a cached fixpoint after new wrapper cells: only the
        # wrapper-using clauses can fire fresh, and anything they add flows
        # through the normal queue
        callargs = ", ".join(
            ["n", "concat", "beta", "occ", "bocc"]
            + [self.fvar[p] for p in self.preds]
            + [self.avar[p] for p in self.preds]
        )
        bparams = ", ".join("B%d" % i for i in range(len(self.preds)))
        w.push("def _chase_beta(n, concat, beta, occ, bocc, %s):" % bparams)
        for i, name in enumerate(self.preds):
            w.line("%s = set(B%d)" % (self.fvar[name], i))
        self._emit_adders(w)
        for fname, fv in beta_refires:
            w.push("for fact in list(%s):" % fv)
            w.line("%s(fact, %s)" % (fname, callargs))
            w.depth -= 1
        self._emit_loop(w, fire_names)
        w.depth = 0
        return "\n".join(w.lines)

    # -- goals

    def compile_goal(self, goal: Formula):
        w = _W()
        params = ["n", "concat", "beta", "occ", "bocc"] + [
            self.fvar[p] for p in self.preds
        ]
        w.push("def _goal(%s):" % ", ".join(params))
        base = w.depth
        for disjunct in (goal.parts if isinstance(goal, Or) else (goal,)):
            self.emit_goal_block(disjunct, {}, w)
            w.depth = base
        w.line("return False")
        return "\n".join(w.lines)

    def emit_goal_block(self, f: Formula, env: dict, w: _W) -> None:
        if isinstance(f, Exists):
            parts = _flatten_and(f.body)
            guards: dict[Var, int] = {}
            for i, p in enumerate(parts):
                if (
                    isinstance(p, Pred)
                    and p.name == "R"
                    and len(p.args) == 1
                    and isinstance(p.args[0], Var)
                    and p.args[0] in f.vars
                    and p.args[0] not in guards
                ):
                    guards[p.args[0]] = i
            used = set()
            env = dict(env)
            for v in f.vars:
                name = w.tmp("q")
                if v in guards:
                    w.push("for (%s,) in %s:" % (name, self.fvar["R"]))
                    used.add(guards[v])
                else:
                    w.push("for %s in range(n):" % name)
                env[v] = name
            rest = [p for i, p in enumerate(parts) if i not in used]
            self.emit_goal_block(
                And(tuple(rest)) if len(rest) != 1 else rest[0], env, w
            )
            return
        if isinstance(f, And):
            exs = [p for p in f.parts if isinstance(p, Exists)]
            if len(exs) > 1:
                raise _CodegenUnsupported("sibling quantifiers in a conjunction")
            for p in f.parts:
                if not isinstance(p, Exists):
                    self.emit_goal_cond(p, env, w)
            if exs:
                self.emit_goal_block(exs[0], env, w)
            else:
                w.line("return True")
            return
        self.emit_goal_cond(f, env, w)
        w.line("return True")

    def emit_goal_cond(self, f: Formula, env: dict, w: _W) -> None:
        if isinstance(f, Pred):
            args = [self.emit_value(a, env, w) for a in f.args]
            tup = "(%s,)" % ", ".join(args) if args else "()"
            w.push("if %s in %s:" % (tup, self.fvar[f.name]))
            return
        if isinstance(f, Eq):
            l = self.emit_value(f.left, env, w)
            r = self.emit_value(f.right, env, w)
            w.push("if %s == %s:" % (l, r))
            return
        if isinstance(f, Exists):
            raise _CodegenUnsupported("nested quantifier inside a conjunction")
        raise _CodegenUnsupported("goal part %r" % (f,))


def _compile_theory(th: FOTheory, clauses: list[_Clause], goal: Formula | None):
    """Compile the chase and a positive goal; None parts on fallback."""
    comp = _Compiler(th, clauses)
    ns: dict = {}
    goal_fn = None
    try:
        src = comp.compile_chase()
        exec(src, ns)
        chase_fn = ns["_chase"]
        inc_fn = ns["_chase_beta"]
    except _CodegenUnsupported:
        return None, None, None, ()
    if goal is not None and _positive(goal):
        try:
            gsrc = comp.compile_goal(goal)
            gns: dict = {}
            exec(gsrc, gns)
            goal_fn = gns["_goal"]
        except _CodegenUnsupported:
            goal_fn = None
    return chase_fn, inc_fn, goal_fn, tuple(comp.preds)


# ---------------------------------------------------------------------------
# The table search

_PRUNE_STRIDE = 8
_TICK = 256


class _Search:
    def __init__(self, th: FOTheory, n: int):
        self.th = th
        self.n = n
        chars = {c: i + 1 for i, c in enumerate(th.alphabet)}
        self.tab = _Tables(n, chars)
        self.nconsts = len(th.alphabet) + 1
        self.max_used = self.nconsts - 1
        self.trail: list[tuple[str, int, int]] = []
        self.clauses, general = _classify(th)
        self.general = [g for g in general if not _all_distinct_consts(g)]
        self.goal = th.goal
        self.goal_positive = th.goal is not None and _positive(th.goal)
        self.goal_needs_beta = th.goal is not None and _mentions_paren(th.goal)
        self.pred_names = set(th.predicates) | {c.head_name for c in self.clauses}
        (
            self.compiled_chase,
            self.compiled_inc,
            self.compiled_goal,
            self.compiled_preds,
        ) = _compile_theory(th, self.clauses, th.goal)
        cells: list[tuple[str, int, int]] = []
        free = [(i, j) for i in range(1, n) for j in range(1, n)]
        free.sort(key=lambda ij: (max(ij), ij[0], ij[1]))
        cells.extend(("c", i, j) for i, j in free)
        cells.extend(("b", i, 0) for i in range(n))
        self.cells = cells
        self.beta_start = len(free)
        self.nodes = 0
        self.node_budget = 0
        self.deadline_at: float | None = None
        self.since_prune = 0

    # -- assignment with incremental associativity propagation

    def _set(self, kind: str, i: int, j: int, v: int) -> bool:
        if kind == "b":
            cur = self.tab.beta[i]
            if cur is not None:
                return cur == v
            self.tab.beta[i] = v
            self.tab.bocc[v].append(i)
            self.trail.append(("b", i, 0))
            if v > self.max_used:
                self.max_used = v
            return True
        cur = self.tab.concat[i][j]
        if cur is not None:
            return cur == v
        queue = [(i, j, v)]
        while queue:
            a, b, w = queue.pop()
            cur = self.tab.concat[a][b]
            if cur is not None:
                if cur != w:
                    return False
                continue
            self.tab.concat[a][b] = w
            self.tab.occ[w].append((a, b))
            self.trail.append(("c", a, b))
            if w > self.max_used:
                self.max_used = w
            if not self._check_around(a, b, w, queue):
                return False
        return True

    def _check_around(self, a: int, b: int, w: int, queue: list) -> bool:
        c = self.tab.concat
        n = self.n
        for z in range(n):
            # (a, b, z): (a*b)*z = a*(b*z)
            r_in = c[b][z]
            if r_in is not None:
                left = c[w][z]
                right = c[a][r_in]
                if left is None and right is not None:
                    queue.append((w, z, right))
                elif right is None and left is not None:
                    queue.append((a, r_in, left))
                elif left is not None and right is not None and left != right:
                    return False
            # (z, a, b): (z*a)*b = z*(a*b)
            l_in = c[z][a]
            if l_in is not None:
                left = c[l_in][b]
                right = c[z][w]
                if left is None and right is not None:
                    queue.append((l_in, b, right))
                elif right is None and left is not None:
                    queue.append((z, w, left))
                elif left is not None and right is not None and left != right:
                    return False
        for (x, y) in list(self.tab.occ[a]):
            # (x, y, b) with x*y = a: a*b = w forces x*(y*b) = w
            r_in = c[y][b]
            if r_in is not None:
                right = c[x][r_in]
                if right is None:
                    queue.append((x, r_in, w))
                elif right != w:
                    return False
        for (y, z) in list(self.tab.occ[b]):
            # (a, y, z) with y*z = b: a*b = w forces (a*y)*z = w
            l_in = c[a][y]
            if l_in is not None:
                left = c[l_in][z]
                if left is None:
                    queue.append((l_in, z, w))
                elif left != w:
                    return False
        return True

    def _undo(self, mark: int, saved_max: int) -> None:
        while len(self.trail) > mark:
            kind, i, j = self.trail.pop()
            if kind == "b":
                v = self.tab.beta[i]
                self.tab.beta[i] = None
                self.tab.bocc[v].pop()
            else:
                v = self.tab.concat[i][j]
                self.tab.concat[i][j] = None
                self.tab.occ[v].pop()
        self.max_used = saved_max

    # -- pruning and leaf checks

    def _facts(self) -> dict[str, set]:
        if self.compiled_chase is not None:
            t = self.tab
            return self.compiled_chase(self.n, t.concat, t.beta, t.occ, t.bocc)
        return _chase(self.tab, self.clauses, self.pred_names)

    def _goal_holds(self, facts: dict[str, set], exact: bool):
        if self.compiled_goal is not None:
            t = self.tab
            return self.compiled_goal(
                self.n, t.concat, t.beta, t.occ, t.bocc,
                *(facts[p] for p in self.compiled_preds),
            )
        return _eval_formula(self.goal, {}, self.tab, facts, exact)

    def _prune_ok(self, force: bool) -> bool:
        if not self.general:
            if self.goal is None:
                return True
            if self.goal_needs_beta and not force:
                return True
        self.since_prune += 1
        if not force and self.since_prune < _PRUNE_STRIDE:
            return True
        self.since_prune = 0
        facts = self._facts()
        if self.goal_positive:
            if self._goal_holds(facts, False) is True:
                return False
        for g in self.general:
            if _eval_formula(g, {}, self.tab, facts, False) is False:
                return False
        return True

    def _leaf(self, facts: dict[str, set] | None = None) -> FiniteModel | None:
        if facts is None:
            facts = self._facts()
        for g in self.general:
            if _eval_formula(g, {}, self.tab, facts, True) is not True:
                return None
        if self.goal is not None:
            if self._goal_holds(facts, True) is not False:
                return None
        model = FiniteModel(
            size=self.n,
            chars=dict(self.tab.chars),
            concat=tuple(tuple(row) for row in self.tab.concat),
            beta=tuple(self.tab.beta),
            preds={name: frozenset(table) for name, table in facts.items()},
        )
        return model

    # -- the depth-first search

    def run(self, node_budget: int, deadline_at: float | None):
        self.node_budget = node_budget
        self.deadline_at = deadline_at
        self.nodes = 0
        try:
            model = self._dfs(0)
        except _Budget:
            return ("budget", None)
        if model is not None:
            return ("model", model)
        return ("exhausted", None)

    def _dfs(self, idx: int, facts: dict[str, set] | None = None) -> FiniteModel | None:
        if idx == len(self.cells):
            return self._leaf(facts)
        kind, i, j = self.cells[idx]
        if (
            facts is None
            and idx == self.beta_start
            and self.compiled_inc is not None
            and self.goal is not None
            and not self.general
        ):
            # the wrapper stage starts on a completed product table: cache
            # its fixpoint and extend it incrementally per wrapper cell
            facts = self._facts()
            if self.goal_positive and self._goal_holds(facts, False) is True:
                return None
        if kind == "c" and self.tab.concat[i][j] is not None:
            return self._dfs(idx + 1, facts)
        if kind == "b" and self.tab.beta[i] is not None:
            return self._dfs(idx + 1, facts)
        top = min(self.n - 1, self.max_used + 1)
        in_beta = kind == "b"
        for v in range(top + 1):
            self.nodes += 1
            if self.nodes > self.node_budget:
                raise _Budget()
            if self.nodes % _TICK == 0 and self.deadline_at is not None:
                if time.monotonic() > self.deadline_at:
                    raise DeadlineExceeded()
            mark = len(self.trail)
            saved_max = self.max_used
            if self._set(kind, i, j, v):
                if facts is not None:
                    t = self.tab
                    grown = self.compiled_inc(
                        self.n, t.concat, t.beta, t.occ, t.bocc,
                        *(facts[p] for p in self.compiled_preds),
                    )
                    ok = not (
                        self.goal_positive
                        and self._goal_holds(grown, False) is True
                    )
                    if ok:
                        got = self._dfs(idx + 1, grown)
                        if got is not None:
                            return got
                elif self._prune_ok(force=in_beta):
                    got = self._dfs(idx + 1, facts)
                    if got is not None:
                        return got
            self._undo(mark, saved_max)
        return None


def find_model(
    th: FOTheory,
    budget: SearchBudget | None = None,
    *,
    min_size: int | None = None,
    max_size: int | None = None,
    deadline: float | None = None,
) -> FindResult:
    """Search for a finite model falsifying the theory's goal.

    Sizes from min_size to max_size are tried round-robin with growing node
    budgets.  The result distinguishes a found model, an exhausted size
    range, and an expired deadline.
    """
    import dataclasses

    budget = dataclasses.replace(budget) if budget is not None else SearchBudget()
    if min_size is not None:
        budget.min_size = min_size
    if max_size is not None:
        budget.max_size = max_size
    if deadline is not None:
        budget.deadline = deadline
    lo = max(budget.min_size, len(th.alphabet) + 1)
    sizes = list(range(lo, budget.max_size + 1))
    if not sizes:
        return FindResult(
            "exhausted",
            "size range below the number of constants",
        )
    deadline_at = (
        time.monotonic() + budget.deadline if budget.deadline is not None else None
    )
    done: set[int] = set()
    node_budget = budget.start_nodes
    while True:
        for n in sizes:
            if n in done:
                continue
            # node cost grows roughly quadratically with the size, so
            # larger sizes get fewer nodes per pass to even out the time
            scaled = max(200, node_budget * lo * lo // (n * n))
            search = _Search(th, n)
            try:
                status, model = search.run(scaled, deadline_at)
            except DeadlineExceeded:
                return FindResult(
                    "deadline",
                    "deadline expired during search at size %d" % n,
                )
            if status == "model":
                assert model is not None
                if not check_model(model, th):
                    raise SearchError(
                        "internal error: candidate model failed re-validation"
                    )
                return FindResult(
                    "model", "found a model of size %d" % n, model, n
                )
            if status == "exhausted":
                done.add(n)
        if len(done) == len(sizes):
            return FindResult(
                "exhausted", "no model up to size %d" % budget.max_size
            )
        node_budget *= budget.growth


def check_model(model: FiniteModel, th: FOTheory) -> bool:
    """Re-validate a model against every axiom and the negated goal."""
    n = model.size
    c = model.concat
    for x in range(n):
        if c[0][x] != x or c[x][0] != x:
            return False
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if c[c[x][y]][z] != c[x][c[y][z]]:
                    return False
    ids = [0] + [model.chars[ch] for ch in th.alphabet]
    if len(set(ids)) != len(ids):
        return False
    tab = _Tables.from_model(model)
    facts = {name: set(table) for name, table in model.preds.items()}
    for ax in th.axioms:
        if _eval_formula(ax, {}, tab, facts, True) is not True:
            return False
    if th.goal is not None:
        if _eval_formula(th.goal, {}, tab, facts, True) is not False:
            return False
    return True


# ---------------------------------------------------------------------------
# Automaton view and serialization


@dataclass(frozen=True)
class TermAutomaton:
    """A deterministic evaluator for ground data terms with an accept set."""

    size: int
    chars: dict[str, int]
    concat: tuple[tuple[int, ...], ...]
    beta: tuple[int, ...]
    finals: frozenset[int]

    def value(self, t: Term) -> int:
        v = _eval_term(t, {}, self.concat, self.beta, self.chars)
        if v is None:
            raise SearchError("term mentions an unknown character")
        return v

    def accepts(self, t: Term) -> bool:
        return self.value(t) in self.finals


def model_to_automaton(
    model: FiniteModel, pred: str, positive: bool = True
) -> TermAutomaton:
    """States and transitions of the model, accepting the elements where the
    unary predicate holds (or fails to hold)."""
    table = model.preds.get(pred, frozenset())
    hit = {t[0] for t in table if len(t) == 1}
    finals = hit if positive else set(range(model.size)) - hit
    return TermAutomaton(
        model.size, dict(model.chars), model.concat, model.beta, frozenset(finals)
    )


def model_to_text(model: FiniteModel) -> str:
    """The familiar finite-model layout: size, tables, predicate tables."""
    n = model.size
    width = max(2, len(str(n - 1)) + 1)

    def cell(v) -> str:
        return str(v).rjust(width)

    lines = ["size %d" % n]
    consts = ["eps=0"] + [
        "'%s'=%d" % (ch, v) for ch, v in sorted(model.chars.items())
    ]
    lines.append("% constants: " + " ".join(consts))
    lines.append("")
    lines.append("  * |" + "".join(cell(j) for j in range(n)))
    lines.append("----+" + "-" * (width * n))
    for i in range(n):
        lines.append(
            "%s |%s" % (str(i).rjust(3), "".join(cell(v) for v in model.concat[i]))
        )
    lines.append("")
    lines.append("beta: " + " ".join(
        "%d->%d" % (i, v) for i, v in enumerate(model.beta)
    ))
    for name in sorted(model.preds):
        table = model.preds[name]
        shown = sorted(table)
        if shown and len(shown[0]) == 1:
            body = "{%s}" % ", ".join(str(t[0]) for t in shown)
        else:
            body = "{%s}" % ", ".join(
                "(%s)" % ",".join(str(x) for x in t) for t in shown
            )
        lines.append("%s: %s" % (name, body))
    return "\n".join(lines) + "\n"


def model_to_json_text(model: FiniteModel, indent: int = 2) -> str:
    return json.dumps(model.to_json(), indent=indent, sort_keys=True)
