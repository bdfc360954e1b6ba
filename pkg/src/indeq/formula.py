"""Tarski formula AST: polynomial sign conditions combined by boolean
connectives and real quantifiers.

Atoms are stored canonically as ``p REL 0`` with REL one of =, !=, >=, >
(the other relations normalize by negating p) and p integer-primitive.
Formulas are immutable values with structural equality.

Absolute values are represented inside polynomials by synthetic variables:
``abs(e)`` parses to a fresh variable whose display name is the canonical
text ``abs(<e>)`` and whose argument polynomial is recorded here.  The
lowering pass in :mod:`indeq.passes` eliminates them by case splitting.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import MissingVariable
from .polynomial import Polynomial, VarId, var_by_index, variable
from .rationals import Rat, rat, rat_sign


class Rel(enum.Enum):
    EQ = "="
    NE = "!="
    GE = ">="
    GT = ">"

    def holds(self, sign: int) -> bool:
        if self is Rel.EQ:
            return sign == 0
        if self is Rel.NE:
            return sign != 0
        if self is Rel.GE:
            return sign >= 0
        return sign > 0

    def negated(self) -> "Rel":
        # involution together with polynomial negation, see Atom.negate
        return _NEG[self]


_NEG = {Rel.EQ: Rel.NE, Rel.NE: Rel.EQ, Rel.GE: Rel.GT, Rel.GT: Rel.GE}


class Formula:
    """Base class; subclasses are frozen dataclasses."""

    __slots__ = ()

    def __and__(self, other):
        return And.of(self, other)

    def __or__(self, other):
        return Or.of(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class TrueF(Formula):
    def __repr__(self):
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __repr__(self):
        return "false"


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Atom(Formula):
    """Polynomial sign condition: poly REL 0, canonicalized."""

    poly: Polynomial
    rel: Rel

    @staticmethod
    def make(poly: Polynomial, rel_text: str) -> Formula:
        """Build an atom from any of = != < <= > >=, canonicalizing.

        Constant polynomials collapse to TRUE/FALSE.
        """
        if rel_text in ("<", "<="):
            poly = -poly
            rel = Rel.GT if rel_text == "<" else Rel.GE
        else:
            rel = Rel(rel_text)
        return Atom.normalized(poly, rel)

    @staticmethod
    def normalized(poly: Polynomial, rel: Rel) -> Formula:
        if poly.is_constant():
            return TRUE if rel.holds(rat_sign(poly.constant_value())) else FALSE
        unit, prim = poly.content_unit()
        if rel in (Rel.EQ, Rel.NE):
            return Atom(prim, rel)
        # positive rescaling preserves order relations; content_unit may
        # have flipped the sign, undo that for >= and >
        if unit < 0:
            prim = -prim
        return Atom(prim, rel)

    def negate(self) -> "Formula":
        if self.rel is Rel.EQ:
            return Atom.normalized(self.poly, Rel.NE)
        if self.rel is Rel.NE:
            return Atom.normalized(self.poly, Rel.EQ)
        if self.rel is Rel.GE:
            return Atom.normalized(-self.poly, Rel.GT)
        return Atom.normalized(-self.poly, Rel.GE)

    def __repr__(self):
        return "%s %s 0" % (self.poly.to_text(), self.rel.value)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    @staticmethod
    def of(*args) -> Formula:
        flat = []
        for a in args:
            if isinstance(a, And):
                flat.extend(a.args)
            else:
                flat.append(a)
        return And(tuple(flat))


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    @staticmethod
    def of(*args) -> Formula:
        flat = []
        for a in args:
            if isinstance(a, Or):
                flat.extend(a.args)
            else:
                flat.append(a)
        return Or(tuple(flat))


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: VarId
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: VarId
    body: Formula


def iff(a: Formula, b: Formula) -> Formula:
    """Biconditional, expressed with the primitive connectives."""
    return And.of(Implies(a, b), Implies(b, a))


# -- absolute-value bookkeeping ----------------------------------------------

_abs_lock = threading.Lock()
_abs_args: dict = {}       # var index -> argument Polynomial
_abs_by_poly: dict = {}    # argument Polynomial -> VarId


def abs_var(argument: Polynomial) -> tuple:
    """(VarId, scale) such that abs of `argument` equals scale * that var.

    The argument is normalized to its sign-normalized primitive part, so
    abs(e), abs(-e) and abs(2e) share one synthetic variable.
    """
    unit, prim = argument.content_unit()
    scale = abs(rat(unit))
    with _abs_lock:
        v = _abs_by_poly.get(prim)
        if v is None:
            v = variable("abs(%s)" % prim.to_text())
            _abs_by_poly[prim] = v
            _abs_args[v.index] = prim
        return v, scale


def abs_argument(index: int) -> Optional[Polynomial]:
    return _abs_args.get(index)


def poly_abs_vars(p: Polynomial) -> list:
    """Indices of abs variables occurring in p."""
    return [i for i in p.variables() if i in _abs_args]


def abs_depth(index: int) -> int:
    """Nesting depth of an abs variable (1 for an abs-free argument)."""
    arg = _abs_args[index]
    inner = poly_abs_vars(arg)
    return 1 + (max(abs_depth(i) for i in inner) if inner else 0)


# -- structural queries -------------------------------------------------------


def _poly_free_indices(p: Polynomial) -> set:
    out = set()
    for i in p.variables():
        arg = _abs_args.get(i)
        if arg is None:
            out.add(i)
        else:
            out |= _poly_free_indices(arg)
    return out


def free_variables(f: Formula) -> set:
    """The set of free VarIds of f (abs variables expand to their arguments)."""

    def walk(g: Formula, bound: frozenset) -> set:
        if isinstance(g, Atom):
            return {var_by_index(i) for i in _poly_free_indices(g.poly)
                    if i not in bound}
        if isinstance(g, (TrueF, FalseF)):
            return set()
        if isinstance(g, Not):
            return walk(g.arg, bound)
        if isinstance(g, (And, Or)):
            out = set()
            for a in g.args:
                out |= walk(a, bound)
            return out
        if isinstance(g, Implies):
            return walk(g.lhs, bound) | walk(g.rhs, bound)
        if isinstance(g, (Forall, Exists)):
            return walk(g.body, bound | {g.var.index})
        raise TypeError("not a formula: %r" % (g,))

    return walk(f, frozenset())


def _eval_poly(p: Polynomial, by_index: dict) -> Rat:
    total = rat(0)
    for m, c in p.terms.items():
        val = rat(c)
        for idx, e in m:
            x = by_index.get(idx)
            if x is None:
                arg = _abs_args.get(idx)
                if arg is None:
                    raise MissingVariable(
                        "variable %r has no assigned value" % var_by_index(idx).name)
                x = abs(_eval_poly(arg, by_index))
                by_index[idx] = x
            val = val * x ** e
        total = total + val
    return total


def evaluate(f: Formula, assignment: Mapping[VarId, Rat]) -> bool:
    """Exact truth of a quantifier-free formula at a rational point.

    abs variables are evaluated through their arguments.
    """
    by_index = {v.index: rat(q) for v, q in assignment.items()}

    def walk(g: Formula) -> bool:
        if isinstance(g, Atom):
            return g.rel.holds(rat_sign(_eval_poly(g.poly, by_index)))
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, Not):
            return not walk(g.arg)
        if isinstance(g, And):
            return all(walk(a) for a in g.args)
        if isinstance(g, Or):
            return any(walk(a) for a in g.args)
        if isinstance(g, Implies):
            return (not walk(g.lhs)) or walk(g.rhs)
        raise ValueError("cannot evaluate a quantified formula at a point")

    return walk(f)


# -- canonical ordering and text ----------------------------------------------

_RANK = {TrueF: 0, FalseF: 1, Atom: 2, Not: 3, And: 4, Or: 5, Implies: 6,
         Forall: 7, Exists: 8}


def canonical_key(f: Formula):
    """Deterministic total order key on formulas (structural)."""
    if isinstance(f, Atom):
        terms = tuple(sorted(((m, (int(c.numerator), int(c.denominator)))
                              for m, c in f.poly.terms.items())))
        return (2, f.rel.value, terms)
    if isinstance(f, (TrueF, FalseF)):
        return (_RANK[type(f)],)
    if isinstance(f, Not):
        return (3, canonical_key(f.arg))
    if isinstance(f, (And, Or)):
        return (_RANK[type(f)], tuple(canonical_key(a) for a in f.args))
    if isinstance(f, Implies):
        return (6, canonical_key(f.lhs), canonical_key(f.rhs))
    if isinstance(f, (Forall, Exists)):
        return (_RANK[type(f)], f.var.index, canonical_key(f.body))
    raise TypeError("not a formula: %r" % (f,))


def to_text(f: Formula) -> str:
    """Canonical concrete syntax accepted back by the parser."""

    def prec(g) -> int:
        if isinstance(g, (Forall, Exists)):
            return 0
        if isinstance(g, Implies):
            return 1
        if isinstance(g, Or):
            return 2
        if isinstance(g, And):
            return 3
        if isinstance(g, Not):
            return 4
        return 5

    def walk(g, parent_prec: int) -> str:
        p = prec(g)
        if isinstance(g, (Forall, Exists)):
            kw = "forall" if isinstance(g, Forall) else "exists"
            names = [g.var.name]
            body = g.body
            while isinstance(body, type(g)):
                names.append(body.var.name)
                body = body.body
            s = "%s %s: %s" % (kw, ", ".join(names), walk(body, 0))
        elif isinstance(g, Implies):
            s = "%s -> %s" % (walk(g.lhs, 2), walk(g.rhs, 1))
        elif isinstance(g, Or):
            s = " or ".join(walk(a, 3) for a in g.args) if g.args else "false"
        elif isinstance(g, And):
            s = " and ".join(walk(a, 4) for a in g.args) if g.args else "true"
        elif isinstance(g, Not):
            s = "not %s" % walk(g.arg, 5)
        elif isinstance(g, Atom):
            s = "%s %s 0" % (g.poly.to_text(), g.rel.value)
        elif isinstance(g, TrueF):
            s = "true"
        elif isinstance(g, FalseF):
            s = "false"
        else:
            raise TypeError("not a formula: %r" % (g,))
        if p < parent_prec or (p == parent_prec and isinstance(g, Implies)):
            return "(" + s + ")"
        return s

    return walk(f, 0)
