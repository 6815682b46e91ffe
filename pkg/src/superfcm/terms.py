"""Terms of the object language and substitutions over them.

Data is built from single characters, an associative concatenation with the
empty sequence as unit, and a unary parenthesis constructor.  Terms add three
kinds of variables and named function calls:

  * e-variables range over arbitrary data sequences (including the empty one),
  * s-variables range over single characters,
  * t-variables range over single items: a character or a parenthesized datum.

Concatenation is kept in a canonical flattened form: a Concat node never has a
Concat child or an Empty child and always has at least two items.  Structural
equality on canonical terms therefore coincides with equality modulo
associativity and unit laws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class SortViolation(Exception):
    """A substitution binds an s- or t-variable outside its range."""


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Empty(Term):
    def __repr__(self) -> str:
        return "Empty()"


EMPTY = Empty()


@dataclass(frozen=True)
class Char(Term):
    ch: str

    def __post_init__(self) -> None:
        if len(self.ch) != 1:
            raise ValueError("Char holds exactly one character: %r" % (self.ch,))

    def __repr__(self) -> str:
        return "Char(%r)" % self.ch


@dataclass(frozen=True)
class Var(Term):
    kind: str  # 'e', 's' or 't'
    name: str

    def __post_init__(self) -> None:
        if self.kind not in ("e", "s", "t"):
            raise ValueError("bad variable kind: %r" % (self.kind,))

    def __repr__(self) -> str:
        return "Var(%s.%s)" % (self.kind, self.name)


@dataclass(frozen=True)
class Paren(Term):
    body: Term

    def __repr__(self) -> str:
        return "Paren(%r)" % (self.body,)


@dataclass(frozen=True)
class Call(Term):
    fn: str
    args: tuple[Term, ...]

    def __repr__(self) -> str:
        return "Call(%s, %r)" % (self.fn, list(self.args))


@dataclass(frozen=True)
class Concat(Term):
    items: tuple[Term, ...]

    def __repr__(self) -> str:
        return "Concat(%r)" % (list(self.items),)


def seq(parts: Iterable[Term]) -> Term:
    """Concatenate terms, flattening into canonical form."""
    items: list[Term] = []
    for p in parts:
        if isinstance(p, Empty):
            continue
        if isinstance(p, Concat):
            items.extend(p.items)
        else:
            items.append(p)
    if not items:
        return EMPTY
    if len(items) == 1:
        return items[0]
    return Concat(tuple(items))


def items(t: Term) -> tuple[Term, ...]:
    """View a term as its top-level item sequence."""
    if isinstance(t, Empty):
        return ()
    if isinstance(t, Concat):
        return t.items
    return (t,)


def word(s: str) -> Term:
    """Build the data term for a plain character string."""
    return seq(Char(c) for c in s)


def is_canonical(t: Term) -> bool:
    if isinstance(t, Concat):
        if len(t.items) < 2:
            return False
        for it in t.items:
            if isinstance(it, (Concat, Empty)):
                return False
            if not is_canonical(it):
                return False
        return True
    if isinstance(t, Paren):
        return is_canonical(t.body)
    if isinstance(t, Call):
        return all(is_canonical(a) for a in t.args)
    return True


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Concat):
        for it in t.items:
            yield from subterms(it)
    elif isinstance(t, Paren):
        yield from subterms(t.body)
    elif isinstance(t, Call):
        for a in t.args:
            yield from subterms(a)


def variables(t: Term) -> list[Var]:
    """Variables of a term in first-occurrence (preorder, left to right) order."""
    out: list[Var] = []
    seen: set[Var] = set()
    for s in subterms(t):
        if isinstance(s, Var) and s not in seen:
            seen.add(s)
            out.append(s)
    return out


def multiplicity(t: Term, v: Var) -> int:
    """Number of occurrences of a variable in a term."""
    return sum(1 for s in subterms(t) if s == v)


def is_passive(t: Term) -> bool:
    """No function calls anywhere."""
    return not any(isinstance(s, Call) for s in subterms(t))


def is_ground(t: Term) -> bool:
    return not any(isinstance(s, Var) for s in subterms(t))


def is_object(t: Term) -> bool:
    """Ground and passive: a datum."""
    return is_passive(t) and is_ground(t)


def size(t: Term) -> int:
    """Number of characters, parens, variables and calls in a term."""
    n = 0
    for s in subterms(t):
        if not isinstance(s, (Concat, Empty)):
            n += 1
    return n


def _binding_ok(v: Var, val: Term) -> bool:
    if v.kind == "e":
        return True
    if v.kind == "s":
        return isinstance(val, Char) or (isinstance(val, Var) and val.kind == "s")
    # t: a single item that is a character or a parenthesized datum, or a
    # variable that can only take such values
    return isinstance(val, (Char, Paren)) or (
        isinstance(val, Var) and val.kind in ("s", "t")
    )


class Subst:
    """A finite map from variables to terms, checked for well-sortedness."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: dict[Var, Term] | None = None, validate: bool = True):
        self.bindings: dict[Var, Term] = dict(bindings) if bindings else {}
        if validate:
            for v, val in self.bindings.items():
                if not _binding_ok(v, val):
                    raise SortViolation(
                        "cannot bind %s.%s to %r" % (v.kind, v.name, val)
                    )

    def __contains__(self, v: Var) -> bool:
        return v in self.bindings

    def __getitem__(self, v: Var) -> Term:
        return self.bindings[v]

    def get(self, v: Var, default: Term | None = None) -> Term | None:
        return self.bindings.get(v, default)

    def __len__(self) -> int:
        return len(self.bindings)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subst) and self.bindings == other.bindings

    def __repr__(self) -> str:
        inner = ", ".join(
            "%s.%s=%r" % (v.kind, v.name, t) for v, t in self.bindings.items()
        )
        return "Subst{%s}" % inner

    def items(self):
        return self.bindings.items()

    def is_renaming(self) -> bool:
        """True if every binding is a variable of the same kind and the map is injective."""
        seen: set[Term] = set()
        for v, val in self.bindings.items():
            if not (isinstance(val, Var) and val.kind == v.kind):
                return False
            if val in seen:
                return False
            seen.add(val)
        return True


def apply(theta: Subst, t: Term) -> Term:
    """Apply a substitution, renormalizing concatenations."""
    if isinstance(t, Var):
        got = theta.get(t)
        return got if got is not None else t
    if isinstance(t, (Empty, Char)):
        return t
    if isinstance(t, Paren):
        return Paren(apply(theta, t.body))
    if isinstance(t, Call):
        return Call(t.fn, tuple(apply(theta, a) for a in t.args))
    if isinstance(t, Concat):
        return seq(apply(theta, it) for it in t.items)
    raise TypeError("not a term: %r" % (t,))


def compose(outer: Subst, inner: Subst) -> Subst:
    """The substitution mapping v to outer(inner(v)) for v in inner's domain,
    plus outer's own bindings for variables inner does not mention."""
    out: dict[Var, Term] = {}
    for v, val in inner.items():
        out[v] = apply(outer, val)
    for v, val in outer.items():
        if v not in out:
            out[v] = val
    return Subst(out, validate=False)


def instance_of(s: Term, t: Term) -> Subst | None:
    """A substitution theta with apply(theta, t) == s, or None.

    Variables of s are treated as rigid atoms, so this is a syntactic
    instance check; any witness is acceptable.
    """
    from . import matching

    return matching.match_rigid([t], [s])
