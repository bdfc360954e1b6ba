"""Recursive-descent parser for the textual Tarski formula language.

Identifiers are [A-Za-z][A-Za-z0-9_]*; keywords: forall exists and or not
abs true false in; relations = != < <= > >=; numbers are integers (rational
constants are written with /); ^ is exponentiation; * may be left implicit
after a number.  Chained comparisons expand to conjunctions, and
``forall x in [a,b]: body`` is sugar for bounding x on [a, b].

Terms are parsed as rational functions (numerator, denominator) so problem
files can write coefficients like (n-1)/(n+1); in plain formula mode the
denominator must be a nonzero rational constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import FormulaSyntaxError, UnknownIdentifier
from .formula import (And, Atom, Exists, FALSE, Forall, Formula, Implies,
                      Not, Or, TRUE, abs_var)
from .polynomial import Polynomial, VarId, variable
from .rationals import Rat, rat

KEYWORDS = {"forall", "exists", "and", "or", "not", "abs", "true", "false", "in"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<op>->|<=|>=|!=|[-+*/^()\[\],:=<>])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str   # 'ident', 'int', 'op', 'end'
    text: str
    pos: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError("unexpected character %r" % text[pos], pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", n))
    return tokens


@dataclass
class TermVal:
    """A term as an exact rational function num/den of polynomials."""

    num: Polynomial
    den: Polynomial

    @staticmethod
    def of(p: Polynomial) -> "TermVal":
        return TermVal(p, Polynomial.constant(1))

    def _norm(self) -> "TermVal":
        if self.den.is_constant() and self.den.constant_value() != 1:
            return TermVal(self.num.scale(1 / self.den.constant_value()),
                           Polynomial.constant(1))
        return self

    def __add__(self, o):
        return TermVal(self.num * o.den + o.num * self.den,
                       self.den * o.den)._norm()

    def __sub__(self, o):
        return TermVal(self.num * o.den - o.num * self.den,
                       self.den * o.den)._norm()

    def __mul__(self, o):
        return TermVal(self.num * o.num, self.den * o.den)._norm()

    def __neg__(self):
        return TermVal(-self.num, self.den)


RELOPS = {"=", "!=", "<", "<=", ">", ">="}


class Parser:
    """One parse over a token stream.

    apply_hook(name, argument TermVal, pos) resolves ``ident(arg)``
    applications (sequence terms in problem files); atom_hook, when given,
    receives (num, den, rel) and builds the atom, allowing problem files to
    defer clearing of polynomial denominators.
    """

    def __init__(self, text: str,
                 free_names=(),
                 allow_any_free: bool = False,
                 apply_hook: Optional[Callable] = None,
                 atom_hook: Optional[Callable] = None):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.scopes: list[dict] = [{}]
        self.free_names = set(free_names)
        self.allow_any_free = allow_any_free
        self.apply_hook = apply_hook
        self.atom_hook = atom_hook

    # -- token helpers ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            raise FormulaSyntaxError("expected %r, found %r" % (text, t.text or "end of input"), t.pos)
        return self.next()

    def at(self, text: str) -> bool:
        return self.peek().text == text

    def error(self, msg: str):
        raise FormulaSyntaxError(msg, self.peek().pos)

    # -- variable scoping --------------------------------------------------

    def lookup_name(self, name: str, pos: int) -> VarId:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if self.allow_any_free or name in self.free_names:
            return variable(name)
        raise UnknownIdentifier("unknown identifier %r" % name, pos)

    # -- formulas -----------------------------------------------------------

    def parse_formula(self) -> Formula:
        f = self._quantified_or_implication()
        t = self.peek()
        if t.kind != "end":
            raise FormulaSyntaxError("unexpected trailing input %r" % t.text, t.pos)
        return f

    def _quantified_or_implication(self) -> Formula:
        t = self.peek()
        if t.text in ("forall", "exists"):
            return self._quantified()
        return self._implication()

    def _quantified(self) -> Formula:
        kw = self.next().text
        names = []
        while True:
            t = self.next()
            if t.kind != "ident" or t.text in KEYWORDS:
                raise FormulaSyntaxError("expected a variable name", t.pos)
            if any(t.text in scope for scope in self.scopes):
                raise FormulaSyntaxError(
                    "variable %r is already bound on this path" % t.text, t.pos)
            names.append(t.text)
            if self.at(","):
                self.next()
                continue
            break
        bounds = None
        if self.at("in"):
            self.next()
            self.expect("[")
            lo = self._term()
            self.expect(",")
            hi = self._term()
            self.expect("]")
            bounds = (lo, hi)
        self.expect(":")
        scope = {}
        for name in names:
            scope[name] = variable(name)
        self.scopes.append(scope)
        body = self._quantified_or_implication()
        self.scopes.pop()
        for name in reversed(names):
            v = scope[name]
            if bounds is not None:
                lo, hi = bounds
                xv = TermVal.of(Polynomial.var(v))
                low = self._make_atom(xv - lo, ">=")
                high = self._make_atom(hi - xv, ">=")
                guard = And.of(low, high)
                body = Implies(guard, body) if kw == "forall" else And.of(guard, body)
            body = Forall(v, body) if kw == "forall" else Exists(v, body)
        return body

    def _implication(self) -> Formula:
        lhs = self._disjunction()
        if self.at("->"):
            self.next()
            rhs = self._quantified_or_implication()
            return Implies(lhs, rhs)
        return lhs

    def _disjunction(self) -> Formula:
        parts = [self._conjunction()]
        while self.at("or"):
            self.next()
            parts.append(self._conjunction())
        return parts[0] if len(parts) == 1 else Or.of(*parts)

    def _conjunction(self) -> Formula:
        parts = [self._negation()]
        while self.at("and"):
            self.next()
            parts.append(self._negation())
        return parts[0] if len(parts) == 1 else And.of(*parts)

    def _negation(self) -> Formula:
        if self.at("not"):
            self.next()
            return Not(self._negation())
        return self._primary()

    def _primary(self) -> Formula:
        t = self.peek()
        if t.text == "true":
            self.next()
            return TRUE
        if t.text == "false":
            self.next()
            return FALSE
        if t.text in ("forall", "exists"):
            return self._quantified()
        if t.text == "(":
            # could open a parenthesized formula or a term; try the term
            # route (comparison) first and fall back on failure
            save = self.i
            try:
                return self._comparison()
            except FormulaSyntaxError:
                self.i = save
            self.next()
            f = self._quantified_or_implication()
            self.expect(")")
            return f
        return self._comparison()

    def _comparison(self) -> Formula:
        parts = [self._term()]
        rels = []
        t = self.peek()
        if t.text not in RELOPS:
            raise FormulaSyntaxError("expected a relation", t.pos)
        while self.peek().text in RELOPS:
            rels.append(self.next().text)
            parts.append(self._term())
        atoms = []
        for k, rel in enumerate(rels):
            atoms.append(self._make_atom(parts[k] - parts[k + 1], rel))
        return atoms[0] if len(atoms) == 1 else And.of(*atoms)

    def _make_atom(self, diff: TermVal, rel: str) -> Formula:
        if self.atom_hook is not None:
            return self.atom_hook(diff.num, diff.den, rel)
        if not diff.den.is_constant():
            self.error("division by a non-constant is not allowed here")
        return Atom.make(diff.num.scale(1 / diff.den.constant_value()), rel)

    # -- terms ---------------------------------------------------------------

    def _term(self) -> TermVal:
        return self._sum()

    def _sum(self) -> TermVal:
        acc = self._product()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self._product()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def _product(self) -> TermVal:
        acc = self._unary()
        while True:
            t = self.peek()
            if t.text in ("*", "/"):
                op = self.next().text
                rhs = self._unary()
                if op == "*":
                    acc = acc * rhs
                else:
                    if rhs.num.is_zero():
                        self.error("division by zero")
                    acc = TermVal(acc.num * rhs.den, acc.den * rhs.num)._norm()
            elif (t.kind == "ident" and t.text not in KEYWORDS) or t.text == "abs":
                # implicit multiplication, e.g. "2x" or "2 abs(x)"
                rhs = self._unary()
                acc = acc * rhs
            else:
                return acc

    def _unary(self) -> TermVal:
        if self.at("-"):
            self.next()
            return -self._unary()
        if self.at("+"):
            self.next()
            return self._unary()
        return self._power()

    def _power(self) -> TermVal:
        base = self._atom_term()
        if self.at("^"):
            self.next()
            neg = False
            if self.at("-"):
                self.next()
                neg = True
            t = self.next()
            if t.kind != "int":
                raise FormulaSyntaxError("expected an integer exponent", t.pos)
            if neg:
                raise FormulaSyntaxError("negative exponents are not supported", t.pos)
            e = int(t.text)
            return TermVal(base.num ** e, base.den ** e)
        return base

    def _atom_term(self) -> TermVal:
        t = self.next()
        if t.kind == "int":
            return TermVal.of(Polynomial.constant(int(t.text)))
        if t.text == "(":
            inner = self._term()
            self.expect(")")
            return inner
        if t.text == "abs":
            self.expect("(")
            inner = self._term()
            self.expect(")")
            if not inner.den.is_constant():
                raise FormulaSyntaxError("abs of a quotient is not supported", t.pos)
            arg = inner.num.scale(1 / inner.den.constant_value())
            if arg.is_constant():
                return TermVal.of(Polynomial.constant(abs(arg.constant_value())))
            v, scale = abs_var(arg)
            return TermVal.of(Polynomial.var(v).scale(scale))
        if t.kind == "ident" and t.text not in KEYWORDS:
            if self.at("(") and self.apply_hook is not None:
                self.next()
                arg = self._term()
                self.expect(")")
                return TermVal.of(self.apply_hook(t.text, arg, t.pos))
            return TermVal.of(Polynomial.var(self.lookup_name(t.text, t.pos)))
        raise FormulaSyntaxError("unexpected token %r" % (t.text or "end of input"), t.pos)


def parse_formula(text: str, free_names=(), allow_any_free: bool = False,
                  apply_hook=None, atom_hook=None) -> Formula:
    """Parse a formula; unknown identifiers error unless allowed as free."""
    return Parser(text, free_names=free_names, allow_any_free=allow_any_free,
                  apply_hook=apply_hook, atom_hook=atom_hook).parse_formula()


def parse_polynomial(text: str, free_names=(), allow_any_free: bool = True,
                     apply_hook=None) -> Polynomial:
    """Parse a polynomial term (constant denominators only)."""
    p = Parser(text, free_names=free_names, allow_any_free=allow_any_free,
               apply_hook=apply_hook)
    val = p._term()
    t = p.peek()
    if t.kind != "end":
        raise FormulaSyntaxError("unexpected trailing input %r" % t.text, t.pos)
    if not val.den.is_constant():
        raise FormulaSyntaxError("polynomial expected, found a quotient", 0)
    return val.num.scale(1 / val.den.constant_value())
