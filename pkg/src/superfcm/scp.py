"""Driving, folding and residual program extraction.

A program is unfolded from its parameterized initial term into a graph of
configurations.  Driving applies every rule of the current redex through the
narrowing matcher; refuted rules leave certified pruned branches.  An open
configuration that is an instance of an ancestor on its path folds back with
a reference edge; when the homeomorphic-embedding whistle fires instead, the
ancestor is replaced in place by the most specific generalization of the
pair and driven again.  A closed graph yields an output format for its exits
(unreachable exits are refuted with the finite-model finder and pruned) and
a residual program read off the surviving edges.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Iterator

from . import fol, machine
from .finder import FiniteModel, SearchBudget, find_model
from .matching import (
    MatchOutcome,
    NoSolution,
    Solutions,
    Unknown,
    check_equations,
    narrow_match,
    prove_unsolvable,
)
from .syntax import Program, Rule, print_term
from .terms import (
    Call,
    Char,
    Concat,
    Paren,
    Subst,
    Term,
    Var,
    apply,
    compose,
    instance_of,
    is_object,
    is_passive,
    items,
    seq,
    variables,
)


class OpenGraph(Exception):
    """Residualization was asked for before every node was closed."""


class LimitExceeded(Exception):
    """A node, depth or time budget ran out; carries the partial graph."""

    def __init__(self, message: str, graph: "UnfoldGraph"):
        super().__init__(message)
        self.graph = graph


@dataclass
class Limits:
    """Budgets for one supercompilation run."""

    max_nodes: int = 500
    max_depth: int = 100
    deadline: float | None = None
    fcm_deadline: float = 10.0
    fcm_min_size: int = 2
    fcm_max_size: int = 8


# ---------------------------------------------------------------------------
# The unfold graph


@dataclass(frozen=True)
class Configuration:
    """A parameterized machine state; its variables range over data."""

    term: Term
    id: int


@dataclass(frozen=True)
class NarrowEdge:
    parent: int
    child: int
    rule_index: int
    narrowing: Subst


@dataclass(frozen=True)
class ReferenceEdge:
    node: int
    target: int
    instance: Subst


@dataclass(frozen=True)
class ExitEdge:
    node: int
    result: Term


@dataclass(frozen=True)
class PrunedBranch:
    node: int
    rule_index: int
    reason: str
    certificate: object = None


class UnfoldGraph:
    """Tree of configurations plus fold-back references, exits and certified
    pruned branches.

    A node replaced by a generalization keeps its identifier; gen_instance
    then maps the new configuration's parameters to the content they had in
    the replaced one, which is what the parent's residual rule must pass.
    """

    def __init__(self, program: Program):
        self.program = program
        self.nodes: dict[int, Configuration] = {}
        self.status: dict[int, str] = {}
        self.depth: dict[int, int] = {}
        self.parent: dict[int, int] = {}
        self.in_edge: dict[int, NarrowEdge] = {}
        self.children: dict[int, list[int]] = {}
        self.exits: dict[int, ExitEdge] = {}
        self.refs: dict[int, ReferenceEdge] = {}
        self.pruned: list[PrunedBranch] = []
        self.opaque: set[int] = set()
        self.gen_instance: dict[int, Subst] = {}
        self.taken: set[str] = set()
        self.created = 0
        for r in program.rules:
            for t in (r.lhs, r.rhs):
                for v in variables(t):
                    self.taken.add(v.name)
        self.root = self.add_node(program.initial)

    def add_node(
        self,
        term: Term,
        parent: int | None = None,
        rule_index: int = -1,
        narrowing: Subst | None = None,
    ) -> int:
        vid = self.created
        self.created += 1
        self.nodes[vid] = Configuration(term, vid)
        self.status[vid] = "open"
        self.children[vid] = []
        for v in variables(term):
            self.taken.add(v.name)
        if parent is None:
            self.depth[vid] = 0
        else:
            self.depth[vid] = self.depth[parent] + 1
            self.parent[vid] = parent
            self.in_edge[vid] = NarrowEdge(
                parent, vid, rule_index, narrowing or Subst()
            )
            self.children[parent].append(vid)
        return vid

    def ancestors(self, vid: int) -> Iterator[int]:
        """Path ancestors, nearest first."""
        while vid in self.parent:
            vid = self.parent[vid]
            yield vid

    def subtree(self, vid: int) -> list[int]:
        out = [vid]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return out

    def drop_subtree(self, vid: int) -> None:
        """Delete the descendants of a node, keeping the node itself."""
        doomed = self.subtree(vid)[1:]
        dead = set(doomed)
        for d in doomed:
            for m in (
                self.nodes,
                self.status,
                self.depth,
                self.parent,
                self.in_edge,
                self.children,
                self.exits,
                self.refs,
                self.gen_instance,
            ):
                m.pop(d, None)
            self.opaque.discard(d)
        self.children[vid] = []
        self.pruned = [pb for pb in self.pruned if pb.node not in dead]

    def generalize_in_place(self, vid: int, general: Term, theta: Subst) -> None:
        """Replace a node's configuration by a generalization of it.

        theta must satisfy apply(theta, general) == the node's current term;
        it composes with any earlier replacement so gen_instance always maps
        back to the configuration the parent edge produced.
        """
        old = self.gen_instance.get(vid)
        self.drop_subtree(vid)
        self.pruned = [pb for pb in self.pruned if pb.node != vid]
        self.nodes[vid] = Configuration(general, vid)
        self.status[vid] = "open"
        self.exits.pop(vid, None)
        self.refs.pop(vid, None)
        self.gen_instance[vid] = compose(old, theta) if old is not None else theta
        for v in variables(general):
            self.taken.add(v.name)


# ---------------------------------------------------------------------------
# Redex selection


def _find_redex(t: Term) -> Call | None:
    """Leftmost-innermost call whose arguments are all passive."""
    if isinstance(t, Call):
        for a in t.args:
            r = _find_redex(a)
            if r is not None:
                return r
        return t
    if isinstance(t, Concat):
        for x in t.items:
            r = _find_redex(x)
            if r is not None:
                return r
        return None
    if isinstance(t, Paren):
        return _find_redex(t.body)
    return None


def _replace(t: Term, target: Call, repl: Term) -> tuple[Term, bool]:
    if t is target:
        return repl, True
    if isinstance(t, Call):
        args = list(t.args)
        for i, a in enumerate(args):
            new, done = _replace(a, target, repl)
            if done:
                args[i] = new
                return Call(t.fn, tuple(args)), True
        return t, False
    if isinstance(t, Concat):
        its = list(t.items)
        for i, x in enumerate(its):
            new, done = _replace(x, target, repl)
            if done:
                its[i] = new
                return seq(its), True
        return t, False
    if isinstance(t, Paren):
        new, done = _replace(t.body, target, repl)
        return (Paren(new), True) if done else (t, False)
    return t, False


# ---------------------------------------------------------------------------
# Equation refutation during driving


class EquationRefuter:
    """Refutes residual parameter-only equations while driving.

    Letter-count arithmetic runs on every call.  The finite-model finder is
    consulted at most where the caller allows it, is skipped when a small
    instantiation already solves the equations, and runs under its own
    deadline.  Outcomes are cached per equation system.
    """

    def __init__(self, alphabet: tuple[str, ...], limits: Limits):
        self.alphabet = tuple(alphabet)
        self.limits = limits
        self.calls = 0
        self.models = 0
        self.spent = 0.0
        self._cache: dict[tuple, MatchOutcome] = {}

    def __call__(
        self, eqs: list[tuple[Term, Term]], allow_fcm: bool = True
    ) -> MatchOutcome:
        out = check_equations(eqs, self.alphabet)
        if isinstance(out, NoSolution):
            return out
        if not allow_fcm or self.limits.fcm_deadline <= 0:
            return out
        key = tuple(sorted((print_term(l), print_term(r)) for l, r in eqs))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self._solvable_quick(eqs):
            got: MatchOutcome = Unknown("a small instantiation solves the equations")
        else:
            t0 = time.monotonic()
            self.calls += 1
            budget = SearchBudget(
                min_size=self.limits.fcm_min_size,
                max_size=self.limits.fcm_max_size,
                deadline=self.limits.fcm_deadline,
            )
            got = prove_unsolvable(eqs, self.alphabet, budget)
            self.spent += time.monotonic() - t0
            if isinstance(got, NoSolution):
                self.models += 1
        self._cache[key] = got
        return got

    def _solvable_quick(self, eqs: list[tuple[Term, Term]]) -> bool:
        params: list[Var] = []
        for l, r in eqs:
            for t in (l, r):
                for v in variables(t):
                    if v not in params:
                        params.append(v)
        for theta in _sample_substs(params, self.alphabet, cap=300, per_var=8):
            if all(apply(theta, l) == apply(theta, r) for l, r in eqs):
                return True
        return False


def _ground_values(kind: str, alphabet: tuple[str, ...], budget: int) -> list[Term]:
    chars = [Char(c) for c in alphabet]
    if kind == "s":
        return chars
    if kind == "t":
        out: list[Term] = list(chars)
        out.append(Paren(seq(())))
        out.extend(Paren(c) for c in chars[:2])
        return out
    words: list[Term] = [seq(())]
    layer: list[tuple[str, ...]] = [()]
    while layer and len(words) < budget:
        layer = [w + (c,) for w in layer for c in alphabet]
        for w in layer:
            words.append(seq(Char(c) for c in w))
            if len(words) >= budget:
                break
    return words


def _sample_substs(
    params: list[Var], alphabet: tuple[str, ...], cap: int, per_var: int = 12
) -> Iterator[Subst]:
    pools = [_ground_values(v.kind, alphabet, per_var) for v in params]
    if any(not pool for pool in pools):
        return
    n = 0
    for combo in itertools.product(*pools):
        yield Subst(dict(zip(params, combo)), validate=False)
        n += 1
        if n >= cap:
            return


# ---------------------------------------------------------------------------
# Driving one configuration


@dataclass(frozen=True)
class DrivenBranch:
    rule_index: int
    narrowing: Subst
    term: Term


@dataclass(frozen=True)
class PrunedRule:
    rule_index: int
    reason: str
    certificate: object = None


@dataclass
class MStepResult:
    branches: list[DrivenBranch]
    pruned: list[PrunedRule]
    unknown: str | None = None


def _rename_rule(rule: Rule, taken: set[str]) -> tuple[tuple[Term, ...], Term]:
    """Rename the rule's variables apart from every name in taken."""
    ren: dict[Var, Term] = {}
    for v in variables(rule.lhs):
        name, i = v.name, 0
        while name in taken:
            i += 1
            name = "%s_%d" % (v.name, i)
        taken.add(name)
        ren[v] = Var(v.kind, name)
    theta = Subst(ren, validate=False)
    return tuple(apply(theta, a) for a in rule.params), apply(theta, rule.rhs)


def mstep(
    p: Program,
    c: Configuration,
    taken: set[str] | None = None,
    refuter: EquationRefuter | None = None,
) -> MStepResult:
    """Drive one configuration: try every rule of its redex in order.

    A refuted rule becomes a pruned-rule record with the refuter's
    certificate.  An inconclusive match makes the whole step unknown, which
    the caller absorbs by leaving the configuration unanalyzed.
    """
    term = c.term
    redex = _find_redex(term)
    if redex is None:
        return MStepResult([], [])
    names = set(taken or ())
    names.update(v.name for v in variables(term))
    branches: list[DrivenBranch] = []
    pruned: list[PrunedRule] = []
    for rule in p.rules_for(redex.fn):
        if len(rule.params) != len(redex.args):
            continue
        local = set(names)
        pats, rhs = _rename_rule(rule, local)
        certificates: list[object] = []
        fcm_left = [1]

        def nosol(eqs: list[tuple[Term, Term]]) -> MatchOutcome:
            if refuter is None:
                out = check_equations(eqs, p.alphabet)
            else:
                allow = fcm_left[0] > 0
                if allow:
                    fcm_left[0] -= 1
                out = refuter(eqs, allow_fcm=allow)
            if isinstance(out, NoSolution):
                certificates.append(out.certificate)
            return out

        got = narrow_match(redex.args, pats, nosol=nosol, fresh_taken=local)
        if isinstance(got, NoSolution):
            cert = got.certificate
            for c2 in certificates:
                if cert is None or isinstance(c2, FiniteModel):
                    cert = c2
            pruned.append(PrunedRule(rule.index, got.reason, cert))
            continue
        if isinstance(got, Unknown):
            return MStepResult(
                [], [], "rule %d: %s" % (rule.index + 1, got.reason)
            )
        assert isinstance(got, Solutions)
        for br in got.branches:
            hole_name = "hole"
            while hole_name in local:
                hole_name += "_"
            hole = Var("e", hole_name)
            ctx, ok = _replace(term, redex, hole)
            assert ok
            filled = dict(br.narrowing.bindings)
            filled[hole] = apply(br.binding, rhs)
            child = apply(Subst(filled, validate=False), ctx)
            branches.append(DrivenBranch(rule.index, br.narrowing, child))
    return MStepResult(branches, pruned)


# ---------------------------------------------------------------------------
# Whistle and generalization


def _embeds_item(a: Term, b: Term) -> bool:
    if isinstance(a, Char) and isinstance(b, Char):
        return a == b
    if isinstance(a, Var) and isinstance(b, Var):
        return a.kind == b.kind
    if isinstance(a, Paren) and isinstance(b, Paren):
        if _embeds_seq(items(a.body), items(b.body)):
            return True
    if isinstance(a, Call) and isinstance(b, Call):
        if (
            a.fn == b.fn
            and len(a.args) == len(b.args)
            and all(
                _embeds_seq(items(x), items(y)) for x, y in zip(a.args, b.args)
            )
        ):
            return True
    # diving: a embeds somewhere below b
    if isinstance(b, Paren):
        return _embeds_seq((a,), items(b.body))
    if isinstance(b, Call):
        return any(_embeds_seq((a,), items(arg)) for arg in b.args)
    return False


def _embeds_seq(xs: tuple[Term, ...], ys: tuple[Term, ...]) -> bool:
    """Higman embedding: xs maps order-preservingly into ys."""
    i = 0
    for y in ys:
        if i < len(xs) and _embeds_item(xs[i], y):
            i += 1
    return i == len(xs)


def whistle(ancestor: Configuration, candidate: Configuration) -> bool:
    """True when the ancestor homeomorphically embeds into the candidate."""
    return _embeds_seq(items(ancestor.term), items(candidate.term))


class _CallMismatch(Exception):
    pass


class _Msg:
    """Most specific generalization of two item sequences.

    Structure is peeled from both ends while the items align; the leftover
    middles collapse into one fresh variable per distinct content pair, so
    equal pairs share a variable across positions.
    """

    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.count = 0
        self.memo: dict[tuple[Term, Term], Var] = {}
        self.sa: dict[Var, Term] = {}
        self.sb: dict[Var, Term] = {}

    def fresh(self, kind: str) -> Var:
        while True:
            self.count += 1
            name = "g%d" % self.count
            if name not in self.taken:
                self.taken.add(name)
                return Var(kind, name)

    def widen(self, xs: tuple[Term, ...], ys: tuple[Term, ...]) -> Var:
        a, b = seq(xs), seq(ys)
        for t in (a, b):
            if not is_passive(t):
                raise _CallMismatch()
        key = (a, b)
        got = self.memo.get(key)
        if got is not None:
            return got
        v = self.fresh(_join_kind(xs, ys))
        self.memo[key] = v
        self.sa[v] = a
        self.sb[v] = b
        return v

    def item(self, a: Term, b: Term) -> Term | None:
        """Generalize two aligned items, or None when they do not align."""
        if a == b:
            return a
        if isinstance(a, Var) and a.kind == "e":
            return None
        if isinstance(b, Var) and b.kind == "e":
            return None
        if isinstance(a, Call) or isinstance(b, Call):
            if (
                isinstance(a, Call)
                and isinstance(b, Call)
                and a.fn == b.fn
                and len(a.args) == len(b.args)
            ):
                args = tuple(
                    seq(self.sequence(items(x), items(y)))
                    for x, y in zip(a.args, b.args)
                )
                return Call(a.fn, args)
            return None
        if isinstance(a, Paren) and isinstance(b, Paren):
            return Paren(seq(self.sequence(items(a.body), items(b.body))))
        return None

    def sequence(self, xs: tuple[Term, ...], ys: tuple[Term, ...]) -> list[Term]:
        lx, ly = list(xs), list(ys)
        front: list[Term] = []
        back: list[Term] = []
        while lx and ly:
            m = self.item(lx[0], ly[0])
            if m is None:
                break
            front.append(m)
            lx.pop(0)
            ly.pop(0)
        while lx and ly:
            m = self.item(lx[-1], ly[-1])
            if m is None:
                break
            back.append(m)
            lx.pop()
            ly.pop()
        out = front
        if lx or ly:
            out.append(self.widen(tuple(lx), tuple(ly)))
        out.extend(reversed(back))
        return out


def _item_kind(t: Term) -> str:
    if isinstance(t, Char):
        return "s"
    if isinstance(t, Paren):
        return "t"
    if isinstance(t, Var):
        return t.kind
    return "e"


def _join_kind(xs: tuple[Term, ...], ys: tuple[Term, ...]) -> str:
    if len(xs) == 1 and len(ys) == 1:
        ka, kb = _item_kind(xs[0]), _item_kind(ys[0])
        if "e" not in (ka, kb):
            return "s" if ka == kb == "s" else "t"
    return "e"


def generalize(
    a: Configuration, b: Configuration, taken: set[str] | None = None
) -> tuple[Configuration, Subst, Subst]:
    """Most specific generalization g with theta_a(g) = a and theta_b(g) = b.

    Equal content pairs are generalized to the same fresh variable, which is
    what makes shared-argument configurations fold after generalization.
    Raises when a function call cannot be aligned (no data generalization
    exists then).
    """
    names = set(taken or ())
    names.update(v.name for v in variables(a.term))
    names.update(v.name for v in variables(b.term))
    m = _Msg(names)
    g = seq(m.sequence(items(a.term), items(b.term)))
    return (
        Configuration(g, -1),
        Subst(m.sa, validate=False),
        Subst(m.sb, validate=False),
    )


# ---------------------------------------------------------------------------
# Folding


def _try_fold(g: UnfoldGraph, vid: int) -> int | None:
    """Close an open node by reference, or generalize an embedded ancestor.

    Returns the ancestor to re-drive after a generalization, or None when
    the node was closed or left open for driving.
    """
    term = g.nodes[vid].term
    for a in g.ancestors(vid):
        theta = instance_of(term, g.nodes[a].term)
        if theta is not None:
            g.refs[vid] = ReferenceEdge(vid, a, theta)
            g.status[vid] = "closed"
            return None
    redex = _find_redex(term)
    if redex is None:
        return None
    for a in g.ancestors(vid):
        other = _find_redex(g.nodes[a].term)
        if other is None or other.fn != redex.fn:
            continue
        if whistle(g.nodes[a], g.nodes[vid]):
            try:
                gen, theta_a, _theta_b = generalize(
                    g.nodes[a], g.nodes[vid], g.taken
                )
            except _CallMismatch:
                g.opaque.add(vid)
                g.status[vid] = "closed"
                return None
            g.generalize_in_place(a, gen.term, theta_a)
            return a
    return None


def fold(g: UnfoldGraph) -> UnfoldGraph:
    """One folding pass: fold or generalize every open non-passive node."""
    for vid in sorted(g.nodes):
        if g.status.get(vid) != "open" or vid not in g.nodes:
            continue
        if is_passive(g.nodes[vid].term):
            continue
        _try_fold(g, vid)
    return g


# ---------------------------------------------------------------------------
# The driving loop


def _drive(g: UnfoldGraph, limits: Limits, refuter: EquationRefuter) -> None:
    p = g.program
    stop = time.monotonic() + limits.deadline if limits.deadline else None
    stack = [g.root]
    while stack:
        vid = stack.pop()
        if vid not in g.nodes or g.status[vid] != "open":
            continue
        if stop is not None and time.monotonic() > stop:
            raise LimitExceeded("time budget exhausted", g)
        if len(g.nodes) > limits.max_nodes or g.created > 8 * limits.max_nodes:
            raise LimitExceeded("node budget exhausted", g)
        if g.depth[vid] > limits.max_depth:
            raise LimitExceeded("depth budget exhausted", g)
        conf = g.nodes[vid]
        if is_passive(conf.term):
            g.exits[vid] = ExitEdge(vid, conf.term)
            g.status[vid] = "closed"
            continue
        redo = _try_fold(g, vid)
        if redo is not None:
            stack.append(redo)
            continue
        if g.status[vid] != "open":
            continue
        res = mstep(p, conf, taken=g.taken, refuter=refuter)
        for pr in res.pruned:
            g.pruned.append(
                PrunedBranch(vid, pr.rule_index, pr.reason, pr.certificate)
            )
        g.status[vid] = "closed"
        if res.unknown is not None:
            g.opaque.add(vid)
            continue
        kids = [
            g.add_node(br.term, parent=vid, rule_index=br.rule_index, narrowing=br.narrowing)
            for br in res.branches
        ]
        stack.extend(reversed(kids))


# ---------------------------------------------------------------------------
# Residual program extraction


def _surviving(g: UnfoldGraph, vid: int) -> list[int]:
    return [u for u in g.children[vid] if g.status.get(u) != "pruned"]


def _is_leaf(g: UnfoldGraph, vid: int) -> bool:
    return vid in g.exits or vid in g.refs or vid in g.opaque


def _residualize(
    g: UnfoldGraph, root: int
) -> tuple[Program, dict[int, int], dict[int, str]]:
    """Read the residual program off the subgraph rooted at a node.

    Returns the program, a map from exit node to the position of its rule in
    the program, and the residual name of every node that got a function.
    """
    sub = g.subtree(root)
    for u in sub:
        if g.status[u] == "open":
            raise OpenGraph("configuration %d is still open" % u)
    live = [u for u in sub if g.status[u] != "pruned"]
    p = g.program

    if root in g.exits:
        return Program(g.exits[root].result, [], p.alphabet), {}, {}

    ref_targets = {g.refs[u].target for u in live if u in g.refs}
    needs: set[int] = set()
    for u in live:
        if _is_leaf(g, u):
            continue
        kids = _surviving(g, u)
        if (
            len(kids) != 1
            or u in ref_targets
            or u in g.gen_instance
            or len(g.in_edge[kids[0]].narrowing) > 0
        ):
            needs.add(u)

    if root in g.opaque:
        entry = root
    elif root in g.gen_instance:
        needs.add(root)
        entry = root
    else:
        entry = root
        while entry not in needs and not _is_leaf(g, entry):
            nxt = _surviving(g, entry)[0]
            if _is_leaf(g, nxt) and nxt not in g.refs:
                # keep a function between the start term and a plain exit
                needs.add(entry)
                break
            entry = nxt
        if not _is_leaf(g, entry):
            needs.add(entry)

    used = set(p.functions)
    names: dict[int, str] = {}
    k = 0
    for u in sorted(needs):
        k += 1
        name = "f%d" % k
        while name in used:
            k += 1
            name = "f%d" % k
        used.add(name)
        names[u] = name
    params = {u: variables(g.nodes[u].term) for u in needs}

    def value(u: int) -> tuple[Term, int | None]:
        """The term a branch into node u stands for, plus its exit node."""
        if u in needs:
            args: tuple[Term, ...]
            if u in g.gen_instance:
                theta = g.gen_instance[u]
                args = tuple(apply(theta, q) for q in params[u])
            else:
                args = tuple(params[u])
            return Call(names[u], args), None
        if u in g.exits:
            return g.exits[u].result, u
        if u in g.refs:
            edge = g.refs[u]
            args = tuple(
                apply(edge.instance, q) for q in params[edge.target]
            )
            return Call(names[edge.target], args), None
        if u in g.opaque:
            return g.nodes[u].term, None
        return value(_surviving(g, u)[0])

    rules: list[tuple[Call, Term]] = []
    exit_rule: dict[int, int] = {}
    for u in sorted(needs):
        for child in _surviving(g, u):
            edge = g.in_edge[child]
            lhs = Call(
                names[u], tuple(apply(edge.narrowing, q) for q in params[u])
            )
            rhs, exit_id = value(child)
            rules.append((lhs, rhs))
            if exit_id is not None:
                exit_rule[exit_id] = len(rules) - 1

    if root in g.opaque:
        initial: Term = g.nodes[root].term
    else:
        initial, _ = value(root)

    # copy rules of original functions that opaque configurations still call
    have = set(names.values())
    pending = []
    seen_fns: set[str] = set()
    for t in [initial] + [r for _, r in rules]:
        for s in (x for x in _walk(t) if isinstance(x, Call)):
            if s.fn not in have and s.fn not in seen_fns:
                seen_fns.add(s.fn)
                pending.append(s.fn)
    while pending:
        fn = pending.pop(0)
        for r in p.rules_for(fn):
            rules.append((r.lhs, r.rhs))
            for s in (x for x in _walk(r.rhs) if isinstance(x, Call)):
                if s.fn not in have and s.fn not in seen_fns:
                    seen_fns.add(s.fn)
                    pending.append(s.fn)

    return Program(initial, rules, p.alphabet), exit_rule, names


def _walk(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Concat):
        for x in t.items:
            yield from _walk(x)
    elif isinstance(t, Paren):
        yield from _walk(t.body)
    elif isinstance(t, Call):
        for a in t.args:
            yield from _walk(a)


def residualize(g: UnfoldGraph) -> Program:
    """The residual program of the whole graph."""
    prog, _, _ = _residualize(g, g.root)
    return prog


def self_sufficient(g: UnfoldGraph, vid: int) -> bool:
    """True when no reference leaves the subtree rooted at the node."""
    inside = set(g.subtree(vid))
    return all(
        g.refs[u].target in inside for u in inside if u in g.refs
    )


# ---------------------------------------------------------------------------
# Output formats


@dataclass(frozen=True)
class OutputFormat:
    term: Term


def _fresh_evar(g: UnfoldGraph) -> Var:
    n = 0
    while True:
        n += 1
        name = "out%d" % n
        if name not in g.taken:
            g.taken.add(name)
            return Var("e", name)


def _refute_exit_rules(
    prog: Program, positions: list[int], limits: Limits
) -> FiniteModel | None:
    """A finite model showing the given exit rules unreachable, or None."""
    try:
        enc = fol.encode_program_overapprox(
            prog, include_exit_outputs=False
        )
    except fol.UnsupportedShape:
        return None
    by_fn: dict[str, list[int]] = {}
    for pos in positions:
        by_fn.setdefault(prog.rules[pos].fn, []).append(pos)
    try:
        goals = [
            fol.exit_goal(enc, fn, idx) for fn, idx in sorted(by_fn.items())
        ]
    except fol.UnsupportedShape:
        return None
    enc.theory.goal = fol.disj(goals)
    budget = SearchBudget(
        min_size=limits.fcm_min_size,
        max_size=limits.fcm_max_size,
        deadline=limits.fcm_deadline,
    )
    return find_model(enc.theory, budget).model


def output_format(
    g: UnfoldGraph, vid: int, limits: Limits | None = None
) -> OutputFormat:
    """Infer an output format for a self-sufficient subgraph.

    The ladder: with no reachable exit the subgraph computes the empty
    partial function and any fresh variable is a format; a datum every other
    exit can be refuted against is the format; otherwise the format is the
    msg of the surviving exit results.  Refuted exits are marked pruned with
    their model as certificate.
    """
    limits = limits or Limits()
    sub = g.subtree(vid)
    if any(u in g.opaque for u in sub):
        return OutputFormat(_fresh_evar(g))
    exits = [
        (u, g.exits[u].result)
        for u in sub
        if u in g.exits and g.status[u] != "pruned"
    ]
    if not exits:
        return OutputFormat(_fresh_evar(g))

    prog, exit_rule, _ = _residualize(g, vid)
    witnessed: set[Term] = set()
    start_vars = variables(prog.initial)
    for theta in _sample_substs(start_vars, g.program.alphabet, cap=400):
        res = machine.eval(prog, theta, fuel=3000)
        if isinstance(res, machine.Value):
            witnessed.add(res.term)

    def prune(nodes: list[int], model: FiniteModel) -> None:
        for u in nodes:
            g.status[u] = "pruned"
            edge = g.in_edge.get(u)
            g.pruned.append(
                PrunedBranch(
                    u,
                    edge.rule_index if edge else -1,
                    "exit refuted by a finite model",
                    model,
                )
            )

    if not witnessed and all(u in exit_rule for u, _ in exits):
        model = _refute_exit_rules(
            prog, [exit_rule[u] for u, _ in exits], limits
        )
        if model is not None:
            prune([u for u, _ in exits], model)
            return OutputFormat(_fresh_evar(g))

    datums = sorted(
        {r for _, r in exits if is_object(r)}, key=print_term
    )
    for d in datums:
        if any(w != d for w in witnessed):
            continue
        bad = [u for u, r in exits if r != d]
        if not bad:
            return OutputFormat(d)
        if all(u in exit_rule for u in bad):
            model = _refute_exit_rules(
                prog, [exit_rule[u] for u in bad], limits
            )
            if model is not None:
                prune(bad, model)
                return OutputFormat(d)

    results = [r for _, r in exits]
    fmt = results[0]
    for r in results[1:]:
        gen, _, _ = generalize(
            Configuration(fmt, -1), Configuration(r, -1), g.taken
        )
        fmt = gen.term
        for v in variables(fmt):
            g.taken.add(v.name)
    return OutputFormat(fmt)


# ---------------------------------------------------------------------------
# Orchestration


@dataclass
class Report:
    format: Term
    empty_function: bool
    pruned: tuple[PrunedBranch, ...]
    nodes: int
    fcm_models: int
    graph: UnfoldGraph

    def to_json(self) -> dict:
        return {
            "format": print_term(self.format),
            "empty_function": self.empty_function,
            "nodes": self.nodes,
            "fcm_models": self.fcm_models,
            "pruned": [
                {
                    "node": pb.node,
                    "rule": pb.rule_index + 1,
                    "reason": pb.reason,
                    "certificate": _certificate_json(pb.certificate),
                }
                for pb in self.pruned
            ],
        }


def _certificate_json(cert: object) -> object:
    if cert is None:
        return None
    if isinstance(cert, FiniteModel):
        return {"kind": "finite-model", "size": cert.size}
    kind = getattr(cert, "kind", None)
    if kind is not None:
        return {"kind": str(kind), "detail": str(getattr(cert, "detail", ""))}
    return str(cert)


def supercompile(
    p: Program, limits: Limits | None = None
) -> tuple[Program, Report]:
    """Drive, fold, analyze and residualize a program.

    Raises LimitExceeded (carrying the partial graph) when a budget runs
    out before the graph closes.
    """
    limits = limits or Limits()
    g = UnfoldGraph(p)
    refuter = EquationRefuter(p.alphabet, limits)
    _drive(g, limits, refuter)
    fmt = output_format(g, g.root, limits)
    prog, _, _ = _residualize(g, g.root)
    empty = not g.opaque and not any(
        g.status[u] != "pruned" for u in g.exits
    )
    report = Report(
        format=fmt.term,
        empty_function=empty,
        pruned=tuple(g.pruned),
        nodes=len(g.nodes),
        fcm_models=sum(
            1 for pb in g.pruned if isinstance(pb.certificate, FiniteModel)
        ),
        graph=g,
    )
    return prog, report


# ---------------------------------------------------------------------------
# Graph export


def _subst_json(theta: Subst) -> dict:
    return {
        "%s.%s" % (v.kind, v.name): print_term(t) for v, t in theta.items()
    }


def graph_to_json(g: UnfoldGraph) -> dict:
    nodes = []
    for vid in sorted(g.nodes):
        entry = {
            "id": vid,
            "term": print_term(g.nodes[vid].term),
            "status": g.status[vid],
            "depth": g.depth[vid],
        }
        if vid in g.opaque:
            entry["opaque"] = True
        if vid in g.gen_instance:
            entry["generalized"] = _subst_json(g.gen_instance[vid])
        nodes.append(entry)
    return {
        "root": g.root,
        "nodes": nodes,
        "narrow": [
            {
                "parent": e.parent,
                "child": e.child,
                "rule": e.rule_index + 1,
                "narrowing": _subst_json(e.narrowing),
            }
            for e in (g.in_edge[u] for u in sorted(g.in_edge))
        ],
        "references": [
            {
                "node": e.node,
                "target": e.target,
                "instance": _subst_json(e.instance),
            }
            for e in (g.refs[u] for u in sorted(g.refs))
        ],
        "exits": [
            {"node": e.node, "result": print_term(e.result)}
            for e in (g.exits[u] for u in sorted(g.exits))
        ],
        "pruned": [
            {
                "node": pb.node,
                "rule": pb.rule_index + 1,
                "reason": pb.reason,
                "certificate": _certificate_json(pb.certificate),
            }
            for pb in g.pruned
        ],
    }


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def graph_to_dot(g: UnfoldGraph) -> str:
    lines = ["digraph unfold {", "  rankdir=TB;", "  node [fontname=monospace];"]
    for vid in sorted(g.nodes):
        label = "%d: %s" % (vid, print_term(g.nodes[vid].term))
        attrs = ['label="%s"' % _dot_escape(label)]
        if vid in g.exits:
            attrs.append("shape=box")
            attrs.append("peripheries=2")
        elif g.status[vid] == "pruned":
            attrs.append("style=filled")
            attrs.append("fillcolor=gray85")
        elif vid in g.opaque:
            attrs.append("style=dashed")
        lines.append("  n%d [%s];" % (vid, ", ".join(attrs)))
    for u in sorted(g.in_edge):
        e = g.in_edge[u]
        bits = ["rule %d" % (e.rule_index + 1)]
        for v, t in e.narrowing.items():
            bits.append("%s.%s=%s" % (v.kind, v.name, print_term(t)))
        lines.append(
            '  n%d -> n%d [label="%s"];'
            % (e.parent, e.child, _dot_escape("\\n".join(bits)))
        )
    for u in sorted(g.refs):
        e = g.refs[u]
        lines.append(
            '  n%d -> n%d [style=dashed, label="fold"];' % (e.node, e.target)
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
