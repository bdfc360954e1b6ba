"""Exact rational arithmetic backend.

All coefficient arithmetic in this package is exact.  We use gmpy2's mpq
when it is installed (much faster for the coefficient sizes CAD produces)
and fall back to the stdlib Fraction otherwise.  Both satisfy the same
contract: values are kept normalized with gcd(|num|, den) = 1 and den > 0,
and zero is 0/1.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

try:
    from gmpy2 import mpq as _mpq, mpz as _mpz

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _mpq = Fraction
    _mpz = int
    HAVE_GMPY2 = False

#: The rational number type used throughout the package.
Rat = _mpq

#: Arbitrary-precision integer type (plain int works fine either way).
Int = _mpz

RAT_ZERO = Rat(0)
RAT_ONE = Rat(1)


def rat(num, den=1):
    """Build a rational from integers, a string like '3/4', or a Rat."""
    if den == 1:
        if isinstance(num, str):
            if "/" in num:
                a, b = num.split("/", 1)
                return Rat(int(a), int(b))
            return Rat(int(num))
        return Rat(num)
    return Rat(num, den)


def rat_num(q) -> int:
    return int(q.numerator)


def rat_den(q) -> int:
    return int(q.denominator)


def rat_sign(q) -> int:
    """Exact sign in {-1, 0, 1}."""
    if q > 0:
        return 1
    if q < 0:
        return -1
    return 0


def rat_floor(q) -> int:
    n, d = rat_num(q), rat_den(q)
    return n // d


def rat_ceil(q) -> int:
    n, d = rat_num(q), rat_den(q)
    return -((-n) // d)


def rat_str(q) -> str:
    """Canonical text: '7', '-3/4'."""
    n, d = rat_num(q), rat_den(q)
    if d == 1:
        return str(n)
    return "%d/%d" % (n, d)


def int_gcd(a: int, b: int) -> int:
    return gcd(a, b)


def int_lcm(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return abs(a // gcd(a, b) * b)


def isqrt_int(n: int) -> int:
    from math import isqrt
    return isqrt(n)


def sqrt_interval(lo, hi, precision_bits: int):
    """Rational enclosure of the square root of [lo, hi], 0 <= lo <= hi."""
    lo = rat(lo)
    hi = rat(hi)
    if lo < 0:
        lo = RAT_ZERO
    shift = 1 << precision_bits
    # lower bound for sqrt(lo)
    n, d = rat_num(lo), rat_den(lo)
    s = isqrt_int(n * d * shift * shift)
    out_lo = Rat(s, d * shift)
    # upper bound for sqrt(hi)
    n, d = rat_num(hi), rat_den(hi)
    s = isqrt_int(n * d * shift * shift)
    if s * s < n * d * shift * shift:
        s += 1
    out_hi = Rat(s, d * shift)
    return out_lo, out_hi


def div_interval(a, b):
    """Interval quotient a/b for b sign-definite (0 strictly outside b)."""
    quots = (a[0] / b[0], a[0] / b[1], a[1] / b[0], a[1] / b[1])
    return (min(quots), max(quots))


def simplest_between(lo, hi):
    """A low-height rational strictly inside (lo, hi).

    Requires lo < hi.  Prefers integers of small magnitude, then short
    continued fractions.  Used to pick cheap sector sample points between
    isolated roots; small heights keep every computation above the sample
    cheap.
    """
    if not lo < hi:
        raise ValueError("empty interval")
    lo_int = rat_floor(lo) + 1  # smallest integer > lo
    hi_int = rat_ceil(hi) - 1   # largest integer < hi
    if lo_int <= hi_int:
        if lo_int <= 0 <= hi_int:
            return RAT_ZERO
        return Rat(lo_int) if lo_int > 0 else Rat(hi_int)
    # no integer inside: both endpoints in the gap (n, n+1]
    n = rat_floor(lo)
    a = lo - n
    b = hi - n
    if a == 0:
        # interval (n, n+b): n + 1/k for the smallest k with 1/k < b
        k = rat_floor(Rat(1) / b) + 1
        return Rat(n) + Rat(1, k)
    inner = simplest_between(Rat(1) / b, Rat(1) / a)
    return Rat(n) + Rat(1) / inner
