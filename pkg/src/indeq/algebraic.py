"""Real algebraic numbers and exact sign evaluation at sample points.

An AlgebraicNumber is a squarefree primitive integer polynomial together
with an isolating interval with rational non-root endpoints.  All numbers
are represented over Q (no towers): roots over algebraic parents are
reduced to rational defining polynomials by iterated resultants.

sign_at evaluates the exact sign of a polynomial at a mixed
rational/algebraic sample point: interval arithmetic with adaptive
refinement decides the generic case, and a resultant-based zero test
decides the remaining ones, so it always terminates with a definite sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import realroots
from .polynomial import Polynomial, VarId, poly_from_int_coeffs, variable
from .polytools import resultant
from .rationals import RAT_ONE, RAT_ZERO, Rat, rat, rat_sign, rat_str

Coordinate = Union[Rat, "AlgebraicNumber"]


class AlgebraicNumber:
    """A real root of a squarefree integer polynomial, isolated exactly.

    The isolating interval may be narrowed in place (monotone, always
    containing the same root with non-root endpoints); narrowing is safe
    under concurrent readers since any stored interval is valid.
    """

    __slots__ = ("defining", "lo", "hi")

    def __init__(self, defining, lo, hi):
        self.defining = tuple(defining)
        self.lo = rat(lo)
        self.hi = rat(hi)

    def __repr__(self):
        return "AlgebraicNumber(%s, [%s, %s])" % (
            list(self.defining), rat_str(self.lo), rat_str(self.hi))

    def trace_text(self, var_name: str = "x") -> str:
        poly = poly_from_int_coeffs(list(self.defining), variable(var_name))
        return "root(poly = %s, in = [%s, %s])" % (
            poly.to_text(), rat_str(self.lo), rat_str(self.hi))

    def width(self) -> Rat:
        return self.hi - self.lo

    def ensure_width(self, width) -> None:
        """Narrow the stored interval below width (in place, monotone)."""
        if self.hi - self.lo > width:
            lo, hi = realroots.refine_interval(
                list(self.defining), self.lo, self.hi, width)
            self.lo, self.hi = lo, hi

    def refined(self, width) -> "AlgebraicNumber":
        """A copy whose isolating interval has length <= width."""
        self.ensure_width(width)
        return AlgebraicNumber(self.defining, self.lo, self.hi)

    def interval(self):
        return (self.lo, self.hi)

    def sign(self) -> int:
        """Exact sign of the number itself."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        # 0 inside: it is a root of the defining polynomial iff coeff[0]==0
        if self.defining[0] == 0:
            return 0
        while self.lo <= 0 <= self.hi:
            self.ensure_width(self.width() / 2)
        return 1 if self.lo > 0 else -1


def refine(value: Coordinate, width) -> Coordinate:
    """Spec operation: rationals return unchanged, algebraic numbers narrowed."""
    if isinstance(value, AlgebraicNumber):
        return value.refined(width)
    return value


def coordinate_sign(value: Coordinate) -> int:
    if isinstance(value, AlgebraicNumber):
        return value.sign()
    return rat_sign(value)


def make_root(rep) -> Coordinate:
    """Convert realroots.isolate_sqfree output entries to coordinates."""
    if isinstance(rep, tuple) and len(rep) == 3 and isinstance(rep[0], list):
        poly, lo, hi = rep
        return AlgebraicNumber(poly, lo, hi)
    return rat(rep)


def isolate_real_roots(p: Polynomial, v: VarId) -> list:
    """All distinct real roots of a univariate polynomial, ascending.

    Rational roots are exact rationals; others AlgebraicNumbers.
    """
    from .errors import ZeroPolynomial
    if p.is_zero():
        raise ZeroPolynomial("cannot isolate roots of the zero polynomial")
    c = realroots.to_int_poly(p, v)
    sf = realroots.squarefree_part_int(c)
    if realroots.degree(sf) < 1:
        return []
    return [make_root(r) for r in realroots.isolate_sqfree(sf)]


def compare(a: Coordinate, b: Coordinate) -> int:
    """Exact trichotomy: -1, 0, +1 for a < b, a = b, a > b."""
    a_alg = isinstance(a, AlgebraicNumber)
    b_alg = isinstance(b, AlgebraicNumber)
    if not a_alg and not b_alg:
        return rat_sign(rat(a) - rat(b))
    if a_alg and not b_alg:
        return -_cmp_rat_alg(rat(b), a)
    if b_alg and not a_alg:
        return _cmp_rat_alg(rat(a), b)
    return _cmp_alg_alg(a, b)


def _cmp_rat_alg(r: Rat, alpha: AlgebraicNumber) -> int:
    """sign(r - alpha)."""
    if r <= alpha.lo:
        return -1
    if r >= alpha.hi:
        return 1
    d = list(alpha.defining)
    s_r = realroots.sign_at(d, r)
    if s_r == 0:
        return 0
    s_lo = realroots.sign_at(d, alpha.lo)
    # root in (lo, r) iff the sign changes across it
    return 1 if s_r != s_lo else -1


def _cmp_alg_alg(a: AlgebraicNumber, b: AlgebraicNumber) -> int:
    while True:
        # endpoints are non-roots, so touching intervals still separate
        if a.hi <= b.lo:
            return -1
        if b.hi <= a.lo:
            return 1
        # overlapping: decide equality exactly via the gcd
        g = realroots.gcd_int(list(a.defining), list(b.defining))
        if realroots.degree(g) >= 1:
            lo = max(a.lo, b.lo)
            hi = min(a.hi, b.hi)
            if realroots.count_real_roots(g, lo, hi) > 0:
                return 0
        a.ensure_width(a.width() / 4)
        b.ensure_width(b.width() / 4)


@dataclass(frozen=True)
class SamplePoint:
    """Ordered exact coordinates, one per lifted variable level."""

    vars: tuple    # tuple[VarId, ...]
    coords: tuple  # tuple[Coordinate, ...]

    def extend(self, v: VarId, value: Coordinate) -> "SamplePoint":
        return SamplePoint(self.vars + (v,), self.coords + (value,))

    def assignment(self) -> dict:
        return dict(zip(self.vars, self.coords))

    def rational_part(self) -> dict:
        return {v: c for v, c in zip(self.vars, self.coords)
                if not isinstance(c, AlgebraicNumber)}

    def algebraic_part(self) -> dict:
        return {v: c for v, c in zip(self.vars, self.coords)
                if isinstance(c, AlgebraicNumber)}


EMPTY_SAMPLE = SamplePoint((), ())


# -- interval arithmetic -------------------------------------------------------


def _ival_mul(a, b):
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(products), max(products))


def _ival_pow(a, e: int):
    lo, hi = a
    if e == 1:
        return a
    if lo >= 0:
        return (lo ** e, hi ** e)
    if hi <= 0:
        if e % 2 == 0:
            return (hi ** e, lo ** e)
        return (lo ** e, hi ** e)
    if e % 2 == 0:
        return (RAT_ZERO, max(lo ** e, hi ** e))
    return (lo ** e, hi ** e)


def interval_evaluate(p: Polynomial, box: dict):
    """Interval enclosure of p over a box {var index: (lo, hi)}."""
    total = (RAT_ZERO, RAT_ZERO)
    for m, c in p.terms.items():
        term = (rat(c), rat(c))
        for idx, e in m:
            term = _ival_mul(term, _ival_pow(box[idx], e))
        total = (total[0] + term[0], total[1] + term[1])
    return total


# -- exact sign evaluation -----------------------------------------------------

_T_VAR = None


def _t_var() -> VarId:
    global _T_VAR
    if _T_VAR is None:
        _T_VAR = variable("@value")
    return _T_VAR


def _value_annihilator(q: Polynomial, algebraic: dict) -> list:
    """Integer polynomial R with R(q(alpha...)) = 0, via iterated resultants.

    q's remaining variables must all be algebraic coordinates; R is nonzero
    because each defining polynomial is independent of the new variable and
    the eliminant stays monic in it.
    """
    t = _t_var()
    r = Polynomial.var(t) - q
    for v, alpha in algebraic.items():
        if v.index not in r.variables():
            continue  # earlier eliminations may already have removed it
        d = poly_from_int_coeffs(list(alpha.defining), v)
        r = resultant(d, r, v)
    return realroots.to_int_poly(r, t)


def sign_at(p: Polynomial, sample: SamplePoint) -> int:
    """Exact sign of p at the sample point.  Always terminates."""
    q = p.evaluate_partial(sample.rational_part())
    if q.is_constant():
        return rat_sign(q.constant_value())
    algebraic = {v: a for v, a in sample.algebraic_part().items()
                 if v.index in q.variables()}
    missing = q.variables() - {v.index for v in algebraic}
    if missing:
        from .errors import MissingVariable
        from .polynomial import var_by_index
        raise MissingVariable("sample point does not cover %s" % ", ".join(
            sorted(var_by_index(i).name for i in missing)))

    def enclosure():
        box = {v.index: a.interval() for v, a in algebraic.items()}
        return interval_evaluate(q, box)

    # fast path: a few rounds of adaptive refinement
    for _ in range(3):
        lo, hi = enclosure()
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        for a in algebraic.values():
            a.ensure_width(a.width() / 16)
    # exact phase: decide whether the value is zero
    ann = _value_annihilator(q, algebraic)
    k = 0
    while k < len(ann) and ann[k] == 0:
        k += 1
    nonzero_possible = k < len(ann)
    value_can_be_zero = k > 0
    if not value_can_be_zero:
        # zero is not a root of the annihilator, so the value is nonzero
        while True:
            lo, hi = enclosure()
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            for a in algebraic.values():
                a.ensure_width(a.width() / 16)
    # zero is a root; separate it from the other roots of the annihilator
    if not nonzero_possible:
        return 0
    stripped = list(ann[k:])
    c0 = abs(stripped[0])
    cmax = max(abs(c) for c in stripped)
    min_nonzero = Rat(c0, c0 + cmax)  # Cauchy: nonzero roots exceed this
    while True:
        lo, hi = enclosure()
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if -min_nonzero < lo and hi < min_nonzero:
            return 0
        for a in algebraic.values():
            a.ensure_width(a.width() / 16)


def sign_at_ordered(p: Polynomial, sample: SamplePoint, order) -> int:
    """Spec-shaped wrapper taking an explicit variable order."""
    del order  # the sample point already carries its variables
    return sign_at(p, sample)
