"""Concrete syntax for rewriting programs, plus printing and JSON emission.

A program file is a sequence of statements, each terminated by ';':

    alphabet: 'ab';            optional, adds characters to the alphabet
    start: Fib(e.n);           the initial term, exactly once
    Fib('') = 'b';             rules, tried in the order written

A term is a ':'-separated sequence of items; an item is a quoted string
(sugar for the concatenation of its characters, '' for the empty sequence),
a variable e.name / s.name / t.name, a function call f(...), or a
parenthesized term '(...)' denoting the parenthesis constructor.  Inside
quotes, backslash escapes a quote or a backslash.

Left-hand sides must be calls on passive arguments, right-hand sides may
only use variables bound on the left, and all rules of one function must
agree on arity; violations raise ArityMismatch, FreeRhsVariable, or a
SyntaxError carrying line and column.
"""

from __future__ import annotations

import builtins
import json
import re
from dataclasses import dataclass
from typing import Iterable

from .terms import (
    Call,
    Char,
    Concat,
    EMPTY,
    Empty,
    Paren,
    Term,
    Var,
    is_passive,
    items,
    seq,
    subterms,
    variables,
)


class SyntaxError(builtins.SyntaxError):
    """A malformed program or term, with 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__("%s (line %d, column %d)" % (message, line, column))
        self.lineno = line
        self.offset = column


class ArityMismatch(Exception):
    """Two rules (or a call) disagree on a function's argument count."""


class FreeRhsVariable(Exception):
    """A rule's right-hand side uses a variable its left-hand side lacks."""


@dataclass(frozen=True)
class Rule:
    lhs: Call
    rhs: Term
    index: int

    @property
    def fn(self) -> str:
        return self.lhs.fn

    @property
    def params(self) -> tuple[Term, ...]:
        return self.lhs.args


class Program:
    """An initial term together with an ordered list of rewriting rules."""

    def __init__(
        self,
        initial: Term,
        rules: Iterable[tuple[Call, Term] | Rule],
        alphabet: Iterable[str] = (),
    ):
        fixed: list[Rule] = []
        for i, r in enumerate(rules):
            if isinstance(r, Rule):
                lhs, rhs = r.lhs, r.rhs
            else:
                lhs, rhs = r
            if not isinstance(lhs, Call):
                raise ValueError("rule left-hand side must be a call: %r" % (lhs,))
            for a in lhs.args:
                if not is_passive(a):
                    raise ValueError(
                        "rule pattern contains a call: %s" % print_term(a)
                    )
            lhs_vars = set()
            for a in lhs.args:
                lhs_vars.update(variables(a))
            for v in variables(rhs):
                if v not in lhs_vars:
                    raise FreeRhsVariable(
                        "rule %d for %s uses unbound %s.%s"
                        % (i + 1, lhs.fn, v.kind, v.name)
                    )
            fixed.append(Rule(lhs, rhs, i))
        arities: dict[str, int] = {}
        for r in fixed:
            k = len(r.lhs.args)
            if arities.setdefault(r.fn, k) != k:
                raise ArityMismatch(
                    "%s defined with %d and %d arguments" % (r.fn, arities[r.fn], k)
                )
        for r in fixed:
            for t in subterms(r.rhs):
                if isinstance(t, Call) and t.fn in arities:
                    if len(t.args) != arities[t.fn]:
                        raise ArityMismatch(
                            "call %s/%d but %s takes %d arguments"
                            % (t.fn, len(t.args), t.fn, arities[t.fn])
                        )
        chars = set(alphabet)
        for t in [initial] + [x for r in fixed for x in (r.lhs, r.rhs)]:
            for s in subterms(t):
                if isinstance(s, Char):
                    chars.add(s.ch)
        self.initial = initial
        self.rules = tuple(fixed)
        self.alphabet = tuple(sorted(chars))
        self._by_fn: dict[str, list[Rule]] = {}
        for r in self.rules:
            self._by_fn.setdefault(r.fn, []).append(r)
        self._arity = arities

    def rules_for(self, fn: str) -> list[Rule]:
        return self._by_fn.get(fn, [])

    def arity(self, fn: str) -> int:
        try:
            return self._arity[fn]
        except KeyError:
            raise ArityMismatch("no rules define %s" % fn) from None

    @property
    def functions(self) -> list[str]:
        out: list[str] = []
        for r in self.rules:
            if r.fn not in out:
                out.append(r.fn)
        return out

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Program)
            and self.initial == other.initial
            and self.rules == other.rules
            and self.alphabet == other.alphabet
        )

    def __repr__(self) -> str:
        return "Program(%d rules, start=%s)" % (len(self.rules), print_term(self.initial))


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<var>[est]\.[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:[^'\\\n]|\\.)*')
  | (?P<badstring>'[^'\n]*$)
  | (?P<punct>[():,=;])
    """,
    re.VERBOSE | re.MULTILINE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line = 1
    bol = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SyntaxError(
                "unexpected character %r" % text[pos], line, pos - bol + 1
            )
        kind = m.lastgroup
        value = m.group()
        col = pos - bol + 1
        if kind == "badstring":
            raise SyntaxError("unterminated string", line, col)
        if kind != "ws":
            toks.append(_Tok(kind, value, line, col))
        nl = value.count("\n")
        if nl:
            line += nl
            bol = pos + value.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - bol + 1))
    return toks


def _unquote(tok: _Tok) -> str:
    raw = tok.value[1:-1]
    out = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c == "\\":
            i += 1
            if i >= len(raw) or raw[i] not in ("'", "\\"):
                raise SyntaxError("bad escape in string", tok.line, tok.col)
            out.append(raw[i])
        else:
            out.append(c)
        i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, value: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise SyntaxError(
                "expected %s, found %r" % (want, t.value or "end of input"),
                t.line,
                t.col,
            )
        return self.next()

    def parse_term(self) -> Term:
        parts = [self.parse_item()]
        while self.peek().kind == "punct" and self.peek().value == ":":
            self.next()
            parts.append(self.parse_item())
        return seq(parts)

    def parse_item(self) -> Term:
        t = self.peek()
        if t.kind == "string":
            self.next()
            return seq(Char(c) for c in _unquote(t))
        if t.kind == "var":
            self.next()
            kind, name = t.value.split(".", 1)
            return Var(kind, name)
        if t.kind == "ident":
            self.next()
            self.expect("punct", "(")
            args: list[Term] = []
            if not (self.peek().kind == "punct" and self.peek().value == ")"):
                args.append(self.parse_term())
                while self.peek().kind == "punct" and self.peek().value == ",":
                    self.next()
                    args.append(self.parse_term())
            self.expect("punct", ")")
            return Call(t.value, tuple(args))
        if t.kind == "punct" and t.value == "(":
            self.next()
            body = self.parse_term()
            self.expect("punct", ")")
            return Paren(body)
        raise SyntaxError(
            "expected a term, found %r" % (t.value or "end of input"), t.line, t.col
        )

    def parse_program(self, initial: Term | None) -> Program:
        rules: list[tuple[Call, Term]] = []
        declared: set[str] = set()
        start = initial
        saw_start = False
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "ident" and t.value in ("start", "alphabet"):
                after = self.toks[self.i + 1]
                if after.kind == "punct" and after.value == ":":
                    self.next()
                    self.next()
                    if t.value == "start":
                        if saw_start:
                            raise SyntaxError("duplicate start", t.line, t.col)
                        saw_start = True
                        start = self.parse_term()
                    else:
                        while self.peek().kind == "string":
                            declared.update(_unquote(self.next()))
                    self.expect("punct", ";")
                    continue
            lhs = self.parse_item()
            if not isinstance(lhs, Call):
                raise SyntaxError("rule must begin with a call", t.line, t.col)
            for a in lhs.args:
                if not is_passive(a):
                    raise SyntaxError(
                        "rule pattern contains a call", t.line, t.col
                    )
            self.expect("punct", "=")
            rhs = self.parse_term()
            self.expect("punct", ";")
            rules.append((lhs, rhs))
        if start is None:
            t = self.peek()
            raise SyntaxError("missing start term", t.line, t.col)
        return Program(start, rules, declared)


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.parse_term()
    p.expect("eof")
    return t


def parse_program(text: str, initial: Term | None = None) -> Program:
    return _Parser(text).parse_program(initial)


def parse_binding(text: str) -> tuple[Var, Term]:
    """Parse a command-line binding such as e.n='III'."""
    p = _Parser(text)
    t = p.peek()
    v = p.parse_item()
    if not isinstance(v, Var):
        raise SyntaxError("binding must start with a variable", t.line, t.col)
    p.expect("punct", "=")
    if p.peek().kind == "eof":
        # an empty right-hand side binds the empty word
        return v, EMPTY
    val = p.parse_term()
    p.expect("eof")
    return v, val


# ---------------------------------------------------------------------------
# Printing

_QUOTE_RE = re.compile(r"[\\']")


def _quote(s: str) -> str:
    return "'%s'" % _QUOTE_RE.sub(lambda m: "\\" + m.group(), s)


def print_term(t: Term) -> str:
    its = items(t)
    if not its:
        return "''"
    parts: list[str] = []
    run: list[str] = []
    for it in its:
        if isinstance(it, Char):
            run.append(it.ch)
            continue
        if run:
            parts.append(_quote("".join(run)))
            run = []
        if isinstance(it, Var):
            parts.append("%s.%s" % (it.kind, it.name))
        elif isinstance(it, Paren):
            parts.append("(%s)" % print_term(it.body))
        elif isinstance(it, Call):
            parts.append(
                "%s(%s)" % (it.fn, ", ".join(print_term(a) for a in it.args))
            )
        else:
            raise ValueError("cannot print %r" % (it,))
    if run:
        parts.append(_quote("".join(run)))
    return ":".join(parts)


def print_program(p: Program) -> str:
    lines = []
    if p.alphabet:
        lines.append("alphabet: %s;" % _quote("".join(p.alphabet)))
    lines.append("start: %s;" % print_term(p.initial))
    for r in p.rules:
        lines.append("%s = %s;" % (print_term(r.lhs), print_term(r.rhs)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON


def term_to_json(t: Term) -> dict:
    if isinstance(t, Empty):
        return {"t": "empty"}
    if isinstance(t, Char):
        return {"t": "char", "c": t.ch}
    if isinstance(t, Var):
        return {"t": "var", "kind": t.kind, "name": t.name}
    if isinstance(t, Paren):
        return {"t": "paren", "body": term_to_json(t.body)}
    if isinstance(t, Call):
        return {"t": "call", "fn": t.fn, "args": [term_to_json(a) for a in t.args]}
    if isinstance(t, Concat):
        return {"t": "concat", "items": [term_to_json(x) for x in t.items]}
    raise ValueError("cannot serialize %r" % (t,))


def term_from_json(d: dict) -> Term:
    tag = d["t"]
    if tag == "empty":
        return EMPTY
    if tag == "char":
        return Char(d["c"])
    if tag == "var":
        return Var(d["kind"], d["name"])
    if tag == "paren":
        return Paren(term_from_json(d["body"]))
    if tag == "call":
        return Call(d["fn"], tuple(term_from_json(a) for a in d["args"]))
    if tag == "concat":
        return seq(term_from_json(x) for x in d["items"])
    raise ValueError("unknown term tag %r" % tag)


def program_to_json(p: Program) -> dict:
    return {
        "kind": "program",
        "alphabet": list(p.alphabet),
        "start": term_to_json(p.initial),
        "rules": [
            {"lhs": term_to_json(r.lhs), "rhs": term_to_json(r.rhs)}
            for r in p.rules
        ],
    }


def program_from_json(d: dict) -> Program:
    rules = []
    for r in d["rules"]:
        lhs = term_from_json(r["lhs"])
        assert isinstance(lhs, Call)
        rules.append((lhs, term_from_json(r["rhs"])))
    return Program(term_from_json(d["start"]), rules, d.get("alphabet", ()))


def emit_json(artifact: object, indent: int | None = 2) -> str:
    """Serialize a program, term, or any artifact exposing to_json()."""
    if isinstance(artifact, Program):
        data = program_to_json(artifact)
    elif isinstance(artifact, Term):
        data = term_to_json(artifact)
    elif hasattr(artifact, "to_json"):
        data = artifact.to_json()
    else:
        data = artifact
    return json.dumps(data, indent=indent, sort_keys=False)
