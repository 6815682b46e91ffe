"""First-order encodings of the data monoid and of rewriting reachability.

The data theory has a fixed shape: three free-monoid axioms, one pairwise
distinctness formula for the unit and the characters, and three closure
axioms for the data predicate R (constants, parenthesis, concatenation).

A program in flat tail form (every right-hand side passive or a single call
on passive arguments) is compiled to one reachability predicate per function
plus a unary output predicate: the initial term seeds its function's
predicate, call rules become implications between predicates, and passive
rules feed the output predicate.  Argument tuples are encoded as the
concatenation of their parenthesized components.  Refuting an existential
reachability goal in a finite model then proves unreachability under
non-deterministic rewriting, and therefore under the ordered semantics.

Formulas reuse passive terms (characters, variables, parentheses,
concatenation) as their term language.  Variable sorts are expressed by
relativization: e-variables by R, s-variables by a disjunction over the
characters, t-variables by character-or-parenthesized-datum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .syntax import Program, Rule, print_term
from .terms import (
    Call,
    Char,
    EMPTY,
    Empty,
    Paren,
    Term,
    Var,
    is_passive,
    seq,
    variables,
)


class UnsupportedShape(Exception):
    """The program or term is outside the encodable fragment."""


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    pass


@dataclass(frozen=True)
class MonoidAxiom(Formula):
    """One of the three structural laws of concatenation.

    Canonical terms already identify words modulo these laws, so the laws
    cannot be written as term equations; they are kept symbolic and model
    finders enforce them on the operation table directly.
    """

    law: str  # "assoc", "unit_right" or "unit_left"

    def __post_init__(self) -> None:
        if self.law not in ("assoc", "unit_right", "unit_left"):
            raise ValueError("unknown monoid law: %r" % (self.law,))


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple[Var, ...]
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple[Var, ...]
    body: Formula


def conj(parts: Sequence[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        raise ValueError("empty conjunction")
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Sequence[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        raise ValueError("empty disjunction")
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


@dataclass
class FOTheory:
    """Axioms and an optional goal over the monoid signature."""

    alphabet: tuple[str, ...]
    axioms: list[Formula]
    goal: Formula | None = None
    predicates: dict[str, int] = field(default_factory=dict)

    def formulas(self) -> list[Formula]:
        out = list(self.axioms)
        if self.goal is not None:
            out.append(self.goal)
        return out

    def to_json(self) -> dict:
        data = {
            "kind": "theory",
            "alphabet": list(self.alphabet),
            "axioms": [render_formula(a) for a in self.axioms],
            "predicates": dict(self.predicates),
        }
        if self.goal is not None:
            data["goal"] = render_formula(self.goal)
        return data


def _check_formula_term(t: Term) -> None:
    if not is_passive(t):
        raise UnsupportedShape("calls cannot appear in formulas: %s" % print_term(t))


def relativize(v: Var, alphabet: Sequence[str]) -> Formula:
    """The sort constraint for a quantified variable."""
    if v.kind == "e":
        return Pred("R", (v,))
    chars = disj([Eq(v, Char(c)) for c in alphabet]) if alphabet else None
    if v.kind == "s":
        if chars is None:
            raise UnsupportedShape("an s-variable needs a nonempty alphabet")
        return chars
    inner = Var("e", "_%s_body" % v.name)
    paren_case = Exists((inner,), And((Eq(v, Paren(inner)), Pred("R", (inner,)))))
    if chars is None:
        return paren_case
    return Or((chars, paren_case))


def forall_data(vs: Sequence[Var], body: Formula, alphabet: Sequence[str]) -> Formula:
    vs = tuple(vs)
    if not vs:
        return body
    guard = conj([relativize(v, alphabet) for v in vs])
    return Forall(vs, Implies(guard, body))


def exists_data(vs: Sequence[Var], body: Formula, alphabet: Sequence[str]) -> Formula:
    vs = tuple(vs)
    if not vs:
        return body
    guard = conj([relativize(v, alphabet) for v in vs])
    return Exists(vs, And((guard, body)))


# ---------------------------------------------------------------------------
# The data theory


def encode_data_theory(alphabet: Sequence[str]) -> FOTheory:
    """Monoid axioms, distinctness, and the closure axioms of R."""
    x, y = Var("e", "x"), Var("e", "y")
    chars = [Char(c) for c in alphabet]
    axioms: list[Formula] = [
        MonoidAxiom("assoc"),
        MonoidAxiom("unit_right"),
        MonoidAxiom("unit_left"),
    ]
    consts: list[Term] = [EMPTY] + chars
    distinct = [
        Not(Eq(consts[i], consts[j]))
        for i in range(len(consts))
        for j in range(i + 1, len(consts))
    ]
    if distinct:
        axioms.append(conj(distinct))
    axioms.append(conj([Pred("R", (c,)) for c in consts]))
    axioms.append(Forall((x,), Implies(Pred("R", (x,)), Pred("R", (Paren(x),)))))
    axioms.append(
        Forall(
            (x, y),
            Implies(And((Pred("R", (x,)), Pred("R", (y,)))), Pred("R", (seq((x, y)),))),
        )
    )
    return FOTheory(tuple(alphabet), axioms, None, {"R": 1})


# ---------------------------------------------------------------------------
# Program encoding

_REACH_PREFIX = "Reach_"
_OUT = "Out"


def encode_tuple(args: Sequence[Term]) -> Term:
    """An argument tuple as the concatenation of parenthesized components."""
    for a in args:
        _check_formula_term(a)
    return seq(Paren(a) for a in args)


@dataclass
class ReachabilityEncoding:
    """Reachability predicates for a program, over the data theory."""

    program: Program
    theory: FOTheory
    kernel_fn: str
    outer_fn: str | None
    reach_preds: dict[str, str]
    projected: dict[str, tuple[int, ...]]

    def reach_args(self, fn: str, args: Sequence[Term]) -> tuple[Term, ...]:
        drop = self.projected.get(fn, ())
        return tuple(a for i, a in enumerate(args) if i not in drop)


def _flat_rhs(rule: Rule) -> Call | None:
    """The single call of a flat tail rule, or None for a passive rhs."""
    if is_passive(rule.rhs):
        return None
    if isinstance(rule.rhs, Call) and all(is_passive(a) for a in rule.rhs.args):
        return rule.rhs
    raise UnsupportedShape(
        "rule %d (%s) is not in flat tail form" % (rule.index + 1, rule.fn)
    )


def _split_initial(p: Program) -> tuple[str, tuple[Term, ...], str | None]:
    t = p.initial
    if isinstance(t, Call):
        if all(is_passive(a) for a in t.args):
            return t.fn, t.args, None
        if (
            len(t.args) == 1
            and isinstance(t.args[0], Call)
            and all(is_passive(a) for a in t.args[0].args)
        ):
            inner = t.args[0]
            return inner.fn, inner.args, t.fn
    raise UnsupportedShape(
        "initial term must be a call on passive arguments, "
        "or one unary call wrapping such a call"
    )


def _counter_positions(p: Program, fn: str) -> tuple[int, ...]:
    """Argument positions of fn that act as pure structural counters.

    A counter position is consumed by its own patterns and feeds only the
    same position of recursive calls; its variables never reach results or
    other argument positions.
    """
    rules = p.rules_for(fn)
    if not rules:
        return ()
    k = len(rules[0].params)
    out: list[int] = []
    for j in range(k):
        ok = True
        for r in rules:
            pat_vars = set(variables(r.params[j]))
            other_vars: set[Var] = set()
            for i, q in enumerate(r.params):
                if i != j:
                    other_vars.update(variables(q))
            if pat_vars & other_vars:
                ok = False
                break
            call = _flat_rhs(r)
            if call is None:
                if pat_vars & set(variables(r.rhs)):
                    ok = False
                    break
                continue
            for i, a in enumerate(call.args):
                avars = set(variables(a))
                if call.fn == fn and i == j:
                    if avars - pat_vars:
                        ok = False
                        break
                elif avars & pat_vars:
                    ok = False
                    break
            else:
                continue
            break
        if ok:
            out.append(j)
    return tuple(out)


def _relevant_chars(
    p: Program,
    encoded_fns: Sequence[str],
    seed_args: Sequence[Term],
    outer_fn: str | None,
    include_exit_outputs: bool = True,
) -> tuple[str, ...]:
    """Characters the encoded axioms and candidate goals can mention.

    Characters of the program that appear nowhere in them need no distinct
    interpretation: data over the full alphabet still maps homomorphically
    into a model by sending the missing characters to any R element, so a
    refutation over the restricted alphabet stays sound.
    """
    chars: set[str] = set()
    for t in seed_args:
        chars.update(c.ch for c in _chars_of(t))
    for f in encoded_fns:
        for r in p.rules_for(f):
            srcs = list(r.params)
            if include_exit_outputs or _flat_rhs(r) is not None:
                srcs.append(r.rhs)
            for t in srcs:
                chars.update(c.ch for c in _chars_of(t))
    if outer_fn is not None:
        for r in p.rules_for(outer_fn):
            for t in r.params:
                chars.update(c.ch for c in _chars_of(t))
    return tuple(sorted(chars))


def encode_program_overapprox(
    p: Program,
    project_counters: bool = False,
    include_exit_outputs: bool = True,
) -> ReachabilityEncoding:
    """Compile a flat-tail program into reachability axioms over T_D.

    With include_exit_outputs=False the Out axioms for passive right-hand
    sides are dropped and their characters do not enter the alphabet; goals
    about exit RULES (their reachability predicates) stay expressible while
    the result values themselves are left out of the theory.
    """
    kernel_fn, seed_args, outer_fn = _split_initial(p)
    encoded = [f for f in p.functions if f != outer_fn]
    theory = encode_data_theory(
        _relevant_chars(p, encoded, seed_args, outer_fn, include_exit_outputs)
    )
    preds: dict[str, str] = {}
    projected: dict[str, tuple[int, ...]] = {}
    encoded_fns = encoded
    for f in encoded_fns:
        preds[f] = _REACH_PREFIX + f
    if project_counters:
        for f in encoded_fns:
            drop = _counter_positions(p, f)
            if drop:
                projected[f] = drop
    enc = ReachabilityEncoding(p, theory, kernel_fn, outer_fn, preds, projected)

    def reach(fn: str, args: Sequence[Term]) -> Pred:
        kept = enc.reach_args(fn, args)
        for a in kept:
            _check_formula_term(a)
        return Pred(preds[fn], tuple(kept))

    if kernel_fn not in preds:
        raise UnsupportedShape("no rules define %s" % kernel_fn)
    seed_vars = []
    for a in seed_args:
        for v in variables(a):
            if v not in seed_vars:
                seed_vars.append(v)
    theory.axioms.append(
        forall_data(seed_vars, reach(kernel_fn, seed_args), theory.alphabet)
    )
    for f in encoded_fns:
        for r in p.rules_for(f):
            call = _flat_rhs(r)
            vs = []
            for a in r.params:
                for v in variables(a):
                    if v not in vs:
                        vs.append(v)
            if call is None:
                if not include_exit_outputs:
                    continue
                body: Formula = Implies(
                    reach(f, r.params), Pred(_OUT, (encode_tuple([r.rhs]),))
                )
            else:
                if call.fn == outer_fn:
                    raise UnsupportedShape(
                        "rule %d calls the outer function %s"
                        % (r.index + 1, call.fn)
                    )
                if call.fn not in preds:
                    raise UnsupportedShape(
                        "rule %d calls undefined %s" % (r.index + 1, call.fn)
                    )
                body = Implies(reach(f, r.params), reach(call.fn, call.args))
            theory.axioms.append(forall_data(vs, body, theory.alphabet))
    for name, fn in ((preds[f], f) for f in encoded_fns):
        arity = p.arity(fn) - len(projected.get(fn, ()))
        theory.predicates[name] = arity
    if include_exit_outputs:
        theory.predicates[_OUT] = 1
    return enc


def exit_goal(enc: ReachabilityEncoding, fn: str, rule_indices: Sequence[int]) -> Formula:
    """Reachability of the given rules of fn, as a formula to refute.

    For the outer function the rules' argument patterns are constrained to be
    kernel outputs; for an encoded function they are constrained by its own
    reachability predicate.
    """
    p = enc.program
    rules = [r for r in p.rules_for(fn) if r.index in set(rule_indices)]
    if not rules:
        raise ValueError("no rules of %s among indices %r" % (fn, rule_indices))
    cases: list[Formula] = []
    for r in rules:
        vs = []
        for a in r.params:
            for v in variables(a):
                if v not in vs:
                    vs.append(v)
        if fn == enc.outer_fn:
            if len(r.params) != 1:
                raise UnsupportedShape("outer function must be unary")
            body: Formula = Pred(_OUT, (encode_tuple([r.params[0]]),))
        elif fn in enc.reach_preds:
            body = Pred(enc.reach_preds[fn], enc.reach_args(fn, r.params))
        else:
            raise UnsupportedShape("%s is not encoded" % fn)
        cases.append(exists_data(vs, body, enc.theory.alphabet))
    return disj(cases)


def goal_for_target(enc: ReachabilityEncoding, fn: str, result: Term) -> Formula:
    """Reachability of fn's rules whose right-hand side is the given datum."""
    idx = [r.index for r in enc.program.rules_for(fn) if r.rhs == result]
    if not idx:
        raise ValueError(
            "no rule of %s returns %s" % (fn, print_term(result))
        )
    return exit_goal(enc, fn, idx)


def encode_one_step_goal(
    config: Call, rule: Rule, alphabet: Sequence[str]
) -> Formula:
    """One-step reachability of a rule from a parameterized configuration,
    overapproximated by non-deterministic rewriting: the existential closure
    of the parenthesized-tuple equation."""
    if config.fn != rule.fn or len(config.args) != len(rule.params):
        from .syntax import ArityMismatch

        raise ArityMismatch(
            "configuration %s does not fit rule %d of %s"
            % (print_term(config), rule.index + 1, rule.fn)
        )
    cfg_vars = []
    for a in config.args:
        for v in variables(a):
            if v not in cfg_vars:
                cfg_vars.append(v)
    renaming, rule_params = _rename_apart(rule.params, {v.name for v in cfg_vars})
    rule_vars = []
    for a in rule_params:
        for v in variables(a):
            if v not in rule_vars:
                rule_vars.append(v)
    equation = Eq(encode_tuple(config.args), encode_tuple(rule_params))
    return exists_data(
        cfg_vars, exists_data(rule_vars, equation, alphabet), alphabet
    )


def one_step_equations(
    config: Call, rule: Rule
) -> list[tuple[Term, Term]] | None:
    """The argument/pattern equations behind the one-step goal, with rule
    variables renamed apart and bare-variable patterns substituted away.

    Returns None when nothing is left to refute (the rule always fires).
    """
    from .terms import Subst, apply

    if config.fn != rule.fn or len(config.args) != len(rule.params):
        from .syntax import ArityMismatch

        raise ArityMismatch(
            "configuration %s does not fit rule %d of %s"
            % (print_term(config), rule.index + 1, rule.fn)
        )
    cfg_names = set()
    for a in config.args:
        for v in variables(a):
            cfg_names.add(v.name)
    _, rule_params = _rename_apart(rule.params, cfg_names)
    pairs = list(zip(config.args, rule_params))
    eqs: list[tuple[Term, Term]] = []
    while pairs:
        arg, pat = pairs.pop(0)
        if isinstance(pat, Var):
            s = Subst({pat: arg}, validate=False)
            pairs = [(a, apply(s, p)) for a, p in pairs]
            eqs = [(l, apply(s, r)) for l, r in eqs]
            continue
        eqs.append((arg, pat))
    eqs = [(l, r) for l, r in eqs if l != r]
    return eqs or None


def encode_ordered_goal(
    config: Call, rules: Sequence[Rule], index: int, alphabet: Sequence[str]
) -> Formula:
    """The full first-matching-rule reachability formula for rule `index`.

    Export only: refuting it with a generic finder is unsound because the
    negated earlier-rule conjuncts range over the whole domain.
    """
    target = None
    earlier: list[Rule] = []
    for r in rules:
        if r.index == index:
            target = r
            break
        if r.fn == config.fn:
            earlier.append(r)
    if target is None:
        raise ValueError("rule index %d not found" % index)
    cfg_vars = []
    for a in config.args:
        for v in variables(a):
            if v not in cfg_vars:
                cfg_vars.append(v)
    taken = {v.name for v in cfg_vars}
    ev = Var("e", _fresh_name("v", taken))
    taken.add(ev.name)
    parts: list[Formula] = [Eq(ev, encode_tuple(config.args))]
    for r in earlier:
        ren, params = _rename_apart(r.params, taken)
        taken.update(v.name for p in params for v in variables(p))
        vs = []
        for a in params:
            for v in variables(a):
                if v not in vs:
                    vs.append(v)
        parts.append(
            forall_data(vs, Not(Eq(ev, encode_tuple(params))), alphabet)
        )
    ren, params = _rename_apart(target.params, taken)
    vs = []
    for a in params:
        for v in variables(a):
            if v not in vs:
                vs.append(v)
    parts.append(exists_data(vs, Eq(ev, encode_tuple(params)), alphabet))
    return exists_data(
        cfg_vars, exists_data([ev], conj(parts), alphabet), alphabet
    )


def equations_goal_theory(
    equations: list[tuple[Term, Term]], alphabet: Sequence[str]
) -> FOTheory:
    """T_D plus the existential closure of an equation conjunction as goal."""
    chars = set(alphabet)
    for left, right in equations:
        for t in (left, right):
            _check_formula_term(t)
            chars.update(c.ch for c in _chars_of(t))
    theory = encode_data_theory(tuple(sorted(chars)))
    vs: list[Var] = []
    for left, right in equations:
        for t in (left, right):
            for v in variables(t):
                if v not in vs:
                    vs.append(v)
    body = conj([Eq(l, r) for l, r in equations])
    theory.goal = exists_data(vs, body, theory.alphabet)
    return theory


def _chars_of(t: Term) -> list[Char]:
    from .terms import subterms

    return [s for s in subterms(t) if isinstance(s, Char)]


def _fresh_name(stem: str, taken: set[str]) -> str:
    if stem not in taken:
        return stem
    i = 1
    while "%s%d" % (stem, i) in taken:
        i += 1
    return "%s%d" % (stem, i)


def _rename_apart(
    patterns: Sequence[Term], taken: set[str]
) -> tuple[dict[Var, Var], tuple[Term, ...]]:
    from .terms import Subst, apply

    ren: dict[Var, Var] = {}
    out: list[Term] = []
    names = set(taken)
    for pat in patterns:
        for v in variables(pat):
            if v not in ren:
                if v.name in names:
                    nv = Var(v.kind, _fresh_name(v.name, names))
                else:
                    nv = v
                names.add(nv.name)
                ren[v] = nv
    s = Subst({v: nv for v, nv in ren.items()}, validate=False)
    for pat in patterns:
        out.append(apply(s, pat))
    return ren, tuple(out)


# ---------------------------------------------------------------------------
# Rendering (human-readable and Mace4)


def render_term(t: Term) -> str:
    if isinstance(t, Empty):
        return "ε"
    if isinstance(t, Char):
        return "'%s'" % t.ch
    if isinstance(t, Var):
        return "%s.%s" % (t.kind, t.name)
    if isinstance(t, Paren):
        return "β(%s)" % render_term(t.body)
    from .terms import items

    return ":".join(render_term(x) for x in items(t))


_LAW_TEXT = {
    "assoc": "(x:y):z = x:(y:z)",
    "unit_right": "x:ε = x",
    "unit_left": "ε:x = x",
}

_LAW_MACE = {
    "assoc": "(x * y) * z = x * (y * z)",
    "unit_right": "x * e0 = x",
    "unit_left": "e0 * x = x",
}


def render_formula(f: Formula) -> str:
    if isinstance(f, MonoidAxiom):
        return _LAW_TEXT[f.law]
    if isinstance(f, Eq):
        return "%s = %s" % (render_term(f.left), render_term(f.right))
    if isinstance(f, Pred):
        return "%s(%s)" % (f.name, ", ".join(render_term(a) for a in f.args))
    if isinstance(f, Not):
        return "~(%s)" % render_formula(f.body)
    if isinstance(f, And):
        return " & ".join("(%s)" % render_formula(x) for x in f.parts)
    if isinstance(f, Or):
        return " | ".join("(%s)" % render_formula(x) for x in f.parts)
    if isinstance(f, Implies):
        return "(%s) -> (%s)" % (render_formula(f.left), render_formula(f.right))
    if isinstance(f, Forall):
        vs = " ".join(render_term(v) for v in f.vars)
        return "all %s (%s)" % (vs, render_formula(f.body))
    if isinstance(f, Exists):
        vs = " ".join(render_term(v) for v in f.vars)
        return "exists %s (%s)" % (vs, render_formula(f.body))
    raise ValueError("cannot render %r" % (f,))


class _MaceNames:
    """Maps formula variables to Mace4 variable identifiers (u..z pool)."""

    POOL = ("x", "y", "z", "u", "w", "v")

    def __init__(self) -> None:
        self.map: dict[Var, str] = {}
        self.used: set[str] = set()

    def name(self, v: Var) -> str:
        got = self.map.get(v)
        if got is not None:
            return got
        for i in range(len(self.POOL) * 40):
            cand = self.POOL[i % len(self.POOL)] + (
                "" if i < len(self.POOL) else str(i // len(self.POOL))
            )
            if cand not in self.used:
                self.used.add(cand)
                self.map[v] = cand
                return cand
        raise RuntimeError("variable pool exhausted")


def _mace_term(t: Term, names: _MaceNames) -> str:
    if isinstance(t, Empty):
        return "e0"
    if isinstance(t, Char):
        return "c_%s" % _char_ident(t.ch)
    if isinstance(t, Var):
        return names.name(t)
    if isinstance(t, Paren):
        return "b1(%s)" % _mace_term(t.body, names)
    from .terms import items

    parts = [_mace_term(x, names) for x in items(t)]
    out = parts[0]
    for nxt in parts[1:]:
        out = "(%s * %s)" % (out, nxt)
    return out


def _char_ident(ch: str) -> str:
    if ch.isalnum() and ch.isascii():
        return ch
    return "u%04x" % ord(ch)


def _mace_formula(f: Formula, names: _MaceNames, top: bool = False) -> str:
    if isinstance(f, MonoidAxiom):
        return _LAW_MACE[f.law]
    if isinstance(f, Eq):
        return "%s = %s" % (_mace_term(f.left, names), _mace_term(f.right, names))
    if isinstance(f, Pred):
        if not f.args:
            return f.name
        return "%s(%s)" % (f.name, ", ".join(_mace_term(a, names) for a in f.args))
    if isinstance(f, Not):
        return "-(%s)" % _mace_formula(f.body, names)
    if isinstance(f, And):
        return " & ".join("(%s)" % _mace_formula(x, names) for x in f.parts)
    if isinstance(f, Or):
        return " | ".join("(%s)" % _mace_formula(x, names) for x in f.parts)
    if isinstance(f, Implies):
        return "(%s) -> (%s)" % (
            _mace_formula(f.left, names),
            _mace_formula(f.right, names),
        )
    if isinstance(f, Forall):
        body = _mace_formula(f.body, names)
        if top:
            # leading universals stay implicit: free lowercase variables
            return body
        qs = " ".join("all %s" % names.name(v) for v in f.vars)
        return "%s (%s)" % (qs, body)
    if isinstance(f, Exists):
        qs = " ".join("exists %s" % names.name(v) for v in f.vars)
        return "%s (%s)" % (qs, _mace_formula(f.body, names))
    raise ValueError("cannot render %r" % (f,))


def _mace_render_top(f: Formula) -> str:
    # leading universal variables stay implicit: Mace4 reads free lowercase
    # identifiers as universally quantified
    names = _MaceNames()
    while isinstance(f, Forall):
        for v in f.vars:
            names.name(v)
        f = f.body
    return _mace_formula(f, names, top=True)


def export_mace4(th: FOTheory) -> str:
    """Render a theory as Mace4 input text.

    Concatenation prints as '*', the parenthesis constructor as b1, the unit
    as e0, and each character as a constant c_<char>.  Top-level universal
    variables are left implicit (Mace4 treats free lowercase variables as
    universally quantified).
    """
    lines = ["formulas(assumptions)."]
    for a in th.axioms:
        lines.append("  %s." % _mace_render_top(a))
    lines.append("end_of_list.")
    lines.append("")
    lines.append("formulas(goals).")
    if th.goal is not None:
        lines.append("  %s." % _mace_render_top(th.goal))
    lines.append("end_of_list.")
    return "\n".join(lines) + "\n"
