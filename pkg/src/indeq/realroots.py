"""Exact real root isolation for univariate polynomials over Q.

The working representation is a dense list of integer coefficients in
ascending degree order ([] is the zero polynomial).  Isolation uses
Descartes' rule on Mobius-transformed polynomials with midpoint bisection
(Vincent-Collins-Akritas style) on the squarefree part, starting from a
power-of-two Cauchy bound.  Exact rational roots are reported as rationals;
other roots as isolating intervals with non-root endpoints.
"""

from __future__ import annotations

from typing import Iterable, Optional, Union

from .errors import NotUnivariate, ZeroPolynomial
from .rationals import (HAVE_GMPY2, RAT_ONE, RAT_ZERO, Rat, int_gcd, rat,
                        rat_ceil, rat_den, rat_floor, rat_num, rat_sign)

if HAVE_GMPY2:
    from gmpy2 import mpz as MPZ
else:  # pragma: no cover
    MPZ = int

IntPoly = list  # list[int/mpz], ascending exponents


def normalize(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def degree(c: IntPoly) -> int:
    return len(c) - 1


def eval_at(c: IntPoly, q) -> Rat:
    """Horner evaluation at an exact rational point."""
    acc = RAT_ZERO
    for coeff in reversed(c):
        acc = acc * q + coeff
    return acc


def sign_at(c: IntPoly, q) -> int:
    """Sign of c at the rational q without building large fractions.

    Evaluates num = den^n * c(num/den) over the integers.
    """
    n, d = rat_num(rat(q)), rat_den(rat(q))
    acc = 0
    dp = 1
    for coeff in reversed(c):
        acc = acc * n + coeff * dp
        dp *= d
    return 1 if acc > 0 else (-1 if acc < 0 else 0)


def derivative(c: IntPoly) -> IntPoly:
    return [i * c[i] for i in range(1, len(c))]


def primitive(c: IntPoly) -> IntPoly:
    g = 0
    for x in c:
        g = int_gcd(g, abs(x))
        if g == 1:
            return list(c)
    if g <= 1:
        return list(c)
    return [x // g for x in c]


def from_rationals(coeffs: Iterable[Rat]) -> IntPoly:
    """Clear denominators and take the primitive part (sign preserved)."""
    from .polynomial import clear_denominators
    return normalize([MPZ(c) for c in
                      clear_denominators([rat(c) for c in coeffs])])


def _prem_int(a: IntPoly, b: IntPoly) -> IntPoly:
    """Integer pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b."""
    a = list(a)
    db = degree(b)
    lb = b[-1]
    if degree(a) < db:
        return normalize(a)
    e = degree(a) - db + 1
    while degree(a) >= db and a:
        da = degree(a)
        la = a[-1]
        shift = da - db
        a = [x * lb for x in a]
        for i, bc in enumerate(b):
            a[i + shift] -= la * bc
        normalize(a)
        e -= 1
    if e > 0 and a:
        m = lb ** e
        a = [x * m for x in a]
    return a


def gcd_int(a: IntPoly, b: IntPoly) -> IntPoly:
    """GCD over Q as a primitive integer polynomial, positive leading sign.

    Subresultant PRS (divisors known in advance), so intermediate
    coefficient growth stays polynomial without per-step content gcds.
    """
    a, b = primitive(normalize(list(a))), primitive(normalize(list(b)))
    if not a:
        return b if not b or b[-1] > 0 else [-x for x in b]
    if not b:
        return a if a[-1] > 0 else [-x for x in a]
    if degree(a) < degree(b):
        a, b = b, a
    g = MPZ(1)
    h = MPZ(1)
    while True:
        delta = degree(a) - degree(b)
        r = normalize(_prem_int(a, b))
        if not r:
            break
        denom = g * h ** delta
        r = [c // denom for c in r]
        a, b = b, r
        if degree(b) == 0:
            return [1]
        g = a[-1]
        if delta > 0:
            h = g ** delta // h ** (delta - 1)
    res = primitive(b)
    if degree(res) == 0:
        return [1]
    return res if res[-1] > 0 else [-x for x in res]


def resultant_int(a: IntPoly, b: IntPoly):
    """Sylvester resultant of integer univariate polynomials (exact sign).

    Subresultant PRS with Cohen's sign bookkeeping; fast because all the
    similarity factors are integers.
    """
    a, b = normalize(list(a)), normalize(list(b))
    if not a or not b:
        return MPZ(0)
    da, db = degree(a), degree(b)
    if da == 0 and db == 0:
        raise ZeroPolynomial("resultant of two constants")
    sign = 1
    if da < db:
        a, b, da, db = b, a, db, da
        if (da & 1) and (db & 1):
            sign = -sign
    if db == 0:
        return sign * MPZ(b[0]) ** da
    g = MPZ(1)
    h = MPZ(1)
    while True:
        da, db = degree(a), degree(b)
        delta = da - db
        if (da & 1) and (db & 1):
            sign = -sign
        r = normalize(_prem_int(a, b))
        a = b
        if not r:
            return MPZ(0)
        denom = g * h ** delta
        b = [c // denom for c in r]
        g = a[-1]
        if delta > 0:
            h = g ** delta // h ** (delta - 1)
        if degree(b) <= 0:
            break
    da = degree(a)
    num = MPZ(b[0]) ** da
    if da >= 1:
        res = num // h ** (da - 1)
    else:
        res = num
    return sign * res


def exact_div_int(a: IntPoly, b: IntPoly) -> IntPoly:
    """Exact division of integer polynomials over Q, result primitive."""
    out = [RAT_ZERO] * (degree(a) - degree(b) + 1)
    rem = [rat(x) for x in a]
    db = degree(b)
    lb = rat(b[-1])
    while normalize(rem) and degree(rem) >= db:
        da = degree(rem)
        q = rem[-1] / lb
        out[da - db] = q
        for i, bc in enumerate(b):
            rem[i + da - db] -= q * bc
    if normalize(rem):
        raise ArithmeticError("inexact univariate division")
    return from_rationals(out)


def squarefree_part_int(c: IntPoly) -> IntPoly:
    """c divided by gcd(c, c'), primitive with positive leading coefficient."""
    c = primitive(normalize(list(c)))
    if degree(c) < 1:
        return c
    g = gcd_int(c, derivative(c))
    if degree(g) == 0:
        return c if c[-1] > 0 else [-x for x in c]
    q = exact_div_int(c, g)
    return q if q[-1] > 0 else [-x for x in q]


def sturm_chain(c: IntPoly) -> list:
    """Sturm chain of the squarefree part, primitive with signs preserved."""
    p = squarefree_part_int(c)
    if degree(p) < 1:
        return [p] if p else []
    chain = [p, primitive(derivative(p))]
    while chain[-1]:
        r = _prem_int(chain[-2], chain[-1])
        # pseudo-division by lb^e can flip signs when lb < 0 and e is odd;
        # renormalize so the element is a positive multiple of -rem.
        lb = chain[-1][-1]
        da, db = degree(chain[-2]), degree(chain[-1])
        e = da - db + 1
        if lb < 0 and e % 2 == 1:
            r = [-x for x in r]
        r = [-x for x in r]
        if not r:
            break
        chain.append(primitive(r))
    return chain


def sign_variations(values: Iterable[int]) -> int:
    count = 0
    prev = 0
    for s in values:
        if s == 0:
            continue
        if prev and s != prev:
            count += 1
        prev = s
    return count


def _sturm_variations_at(chain: list, q) -> int:
    return sign_variations(sign_at(c, q) for c in chain)


def _sturm_variations_at_inf(chain: list, positive: bool) -> int:
    signs = []
    for c in chain:
        if not c:
            signs.append(0)
            continue
        s = 1 if c[-1] > 0 else -1
        if not positive and degree(c) % 2 == 1:
            s = -s
        signs.append(s)
    return sign_variations(signs)


def count_real_roots(c: IntPoly, lo=None, hi=None) -> int:
    """Number of distinct real roots in (lo, hi]; all roots when unbounded."""
    c = normalize(list(c))
    if degree(c) < 1:
        return 0
    chain = sturm_chain(c)
    va = (_sturm_variations_at(chain, lo) if lo is not None
          else _sturm_variations_at_inf(chain, positive=False))
    vb = (_sturm_variations_at(chain, hi) if hi is not None
          else _sturm_variations_at_inf(chain, positive=True))
    return va - vb


def cauchy_bound_pow2(c: IntPoly) -> int:
    """Power of two strictly exceeding the magnitude of every root."""
    c = normalize(list(c))
    if degree(c) < 1:
        return 1
    lc = abs(c[-1])
    top = max(abs(x) for x in c[:-1]) if len(c) > 1 else 0
    bound = 1 + top // lc + 1
    b = 1
    while b <= bound:
        b <<= 1
    return b


def taylor_shift(c: IntPoly, a: int) -> IntPoly:
    """p(x + a) for integer a (synthetic division, O(n^2))."""
    out = list(c)
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] += a * out[j + 1]
    return out


def _reverse(c: IntPoly, n: Optional[int] = None) -> IntPoly:
    """x^n * p(1/x) padded to degree n."""
    if n is None:
        n = degree(c)
    out = [0] * (n + 1)
    for i, x in enumerate(c):
        out[n - i] = x
    return normalize(out)


def _descartes_variations_01(c: IntPoly) -> int:
    """Descartes bound for the number of roots of c in the open (0, 1)."""
    n = degree(c)
    t = taylor_shift(_reverse(c, n), 1)
    return sign_variations(1 if x > 0 else (-1 if x < 0 else 0) for x in t)


def _transform_to_01(c: IntPoly, lo, hi) -> IntPoly:
    """Integer polynomial whose roots in (0,1) match c's roots in (lo, hi).

    q(t) = c(lo + (hi-lo) t) with denominators cleared.
    """
    w = hi - lo
    n = degree(c)
    # c(lo + w t) = sum c_i (lo + w t)^i ; evaluate by Horner in (lo + w t)
    acc = [rat(c[-1])]
    for i in range(n - 1, -1, -1):
        # acc = acc * (lo + w t) + c_i
        nxt = [RAT_ZERO] * (len(acc) + 1)
        for j, a in enumerate(acc):
            nxt[j] += a * lo
            nxt[j + 1] += a * w
        nxt[0] += c[i]
        acc = nxt
    return from_rationals(acc)


RootRep = Union[Rat, tuple]  # exact rational, or (lo, hi) isolating interval


def _deflate_rational_root(c: IntPoly, root) -> IntPoly:
    """Divide out (den*x - num) for the known simple rational root."""
    num, den = rat_num(root), rat_den(root)
    return exact_div_int(c, normalize([-num, den]))


def _try_promote_rational(c: IntPoly, lo, hi):
    """Exact rational root in the isolating interval (lo, hi), if any.

    Every rational root of the primitive integer polynomial c has the form
    k/lc.  Refining the interval below 1/(2*lc) leaves at most one
    candidate k, which is then checked exactly.  Skipped when the leading
    coefficient is huge (the refinement would cost bits(lc) bisections).
    """
    if degree(c) == 1:
        return Rat(-c[0], c[1])
    lc = abs(c[-1])
    if lc.bit_length() > 64:
        return None
    s_lo = sign_at(c, lo)
    limit = Rat(1, 2 * lc)
    while hi - lo >= limit:
        mid = (lo + hi) / 2
        s_mid = sign_at(c, mid)
        if s_mid == 0:
            return mid
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    k_lo = rat_ceil(lo * lc)
    k_hi = rat_floor(hi * lc)
    for k in range(k_lo, k_hi + 1):
        cand = Rat(k, lc)
        if lo < cand < hi and sign_at(c, cand) == 0:
            return cand
    return None


def isolate_sqfree(c: IntPoly) -> list:
    """Isolate all real roots of a squarefree primitive integer polynomial.

    Returns an ascending list whose entries are exact rationals or
    (poly, lo, hi) isolating intervals; interval endpoints are dyadic
    non-roots and each interval contains exactly one root.
    """
    c = normalize(list(c))
    if degree(c) < 1:
        return []
    bound = cauchy_bound_pow2(c)
    found = []  # (sort key, 0 for rational / 1 for interval, representation)
    stack = [(c, Rat(-bound), Rat(bound))]
    while stack:
        poly, lo, hi = stack.pop()
        v = _descartes_variations_01(_transform_to_01(poly, lo, hi))
        if v == 0:
            continue
        if v == 1:
            rat_root = _try_promote_rational(poly, lo, hi)
            if rat_root is not None:
                found.append((rat_root, 0, rat_root))
            else:
                found.append((lo, 1, (poly, lo, hi)))
            continue
        mid = (lo + hi) / 2
        if sign_at(poly, mid) == 0:
            found.append((mid, 0, mid))
            poly = _deflate_rational_root(poly, mid)
        stack.append((poly, lo, mid))
        stack.append((poly, mid, hi))
    found.sort(key=lambda t: (t[0], t[1]))
    return [rep for _, _, rep in found]


def refine_interval(c: IntPoly, lo, hi, width):
    """Shrink an isolating interval below width by sign-preserving bisection.

    The interval must bracket a sign change of c; returns (lo, hi) with the
    same root strictly inside and non-root endpoints.
    """
    s_lo = sign_at(c, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s_mid = sign_at(c, mid)
        if s_mid == 0:
            # the root is rational and equals mid; keep it interior
            quarter = (hi - lo) / 4
            return (mid - quarter, mid + quarter) if quarter < width \
                else refine_interval(c, mid - quarter, mid + quarter, width)
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


# -- Polynomial-level wrappers ----------------------------------------------


def to_int_poly(p, v) -> IntPoly:
    """Dense primitive integer coefficients of a univariate Polynomial."""
    from .polynomial import univariate_coeffs
    try:
        coeffs = univariate_coeffs(p, v)
    except ValueError as e:
        raise NotUnivariate(str(e)) from None
    return from_rationals(coeffs)


def sturm_sequence(p, v) -> list:
    """Sturm chain of a univariate Polynomial, as Polynomials."""
    from .polynomial import poly_from_int_coeffs
    if p.is_zero():
        raise ZeroPolynomial("Sturm sequence of the zero polynomial")
    chain = sturm_chain(to_int_poly(p, v))
    return [poly_from_int_coeffs(c, v) for c in chain]
