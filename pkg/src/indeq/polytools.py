"""Elimination tools on exact polynomials: pseudo-division, gcd,
subresultant remainder sequences, resultants, discriminants and squarefree
decomposition.

The resultant is computed by the fraction-free subresultant PRS
(Collins-Brown style) with exact sign bookkeeping, so it equals the
Sylvester-matrix determinant.  Inputs are reduced to integer-primitive
form first to control coefficient growth.
"""

from __future__ import annotations

from typing import Optional

from .errors import BothConstant, ZeroPolynomial
from .polynomial import (Polynomial, VarId, _mono_div, _mono_divides,
                         _mono_key, _mono_mul, var_by_index)
from .rationals import rat


def try_exact_div(p: Polynomial, q: Polynomial) -> Optional[Polynomial]:
    """Quotient p/q when the division is exact, else None."""
    if q.is_zero():
        raise ZeroPolynomial("division by the zero polynomial")
    if p.is_zero():
        return p
    if q.is_constant():
        return p.scale(1 / q.constant_value())
    q_lead = max(q.terms, key=_mono_key)
    q_lc = q.terms[q_lead]
    rem = dict(p.terms)
    quot: dict = {}
    while rem:
        m = max(rem, key=_mono_key)
        if not _mono_divides(q_lead, m):
            return None
        qm = _mono_div(m, q_lead)
        qc = rem[m] / q_lc
        quot[qm] = quot.get(qm, 0) + qc
        # rem -= qc * x^qm * q
        for qm2, qc2 in q.terms.items():
            mm = _mono_mul(qm, qm2)
            c = rem.get(mm, None)
            c = (0 if c is None else c) - qc * qc2
            if c == 0:
                rem.pop(mm, None)
            else:
                rem[mm] = c
    return Polynomial(quot)


def exact_div(p: Polynomial, q: Polynomial) -> Polynomial:
    """Exact division; raises ArithmeticError if q does not divide p."""
    r = try_exact_div(p, q)
    if r is None:
        raise ArithmeticError("inexact polynomial division")
    return r


def prem(a: Polynomial, b: Polynomial, v: VarId) -> Polynomial:
    """Pseudo-remainder: lc(b)^(deg a - deg b + 1) * a = q*b + prem."""
    da, db = a.degree(v), b.degree(v)
    if db < 0:
        raise ZeroPolynomial("pseudo-division by zero")
    if da < db:
        return a
    lb = b.leading_coefficient(v)
    xv = Polynomial.var(v)
    r = a
    e = da - db + 1
    while not r.is_zero():
        dr = r.degree(v)
        if dr < db:
            break
        lr = r.leading_coefficient(v)
        r = lb * r - lr * xv ** (dr - db) * b
        e -= 1
    if e > 0:
        r = lb ** e * r
    return r


def content_wrt(p: Polynomial, v: VarId) -> Polynomial:
    """Content of p as a univariate polynomial in v (gcd of coefficients)."""
    coeffs = [c for c in p.coefficients(v) if not c.is_zero()]
    if not coeffs:
        return Polynomial.zero()
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_constant():
            break
        g = gcd_poly(g, c)
    if g.is_constant():
        return Polynomial.constant(1)
    return g.primitive()


def primitive_wrt(p: Polynomial, v: VarId) -> Polynomial:
    cont = content_wrt(p, v)
    if cont.is_constant():
        return p
    return exact_div(p, cont)


def _pick_main_var(p: Polynomial, q: Polynomial) -> Optional[int]:
    common = p.variables() & q.variables()
    if not common:
        return None
    # deterministic: prefer the variable where the smaller degree is minimal
    def key(idx):
        v = var_by_index(idx)
        return (min(p.degree(v), q.degree(v)), idx)
    return min(common, key=key)


def gcd_poly(p: Polynomial, q: Polynomial) -> Polynomial:
    """GCD over Q, returned integer-primitive with positive leading sign.

    Constants are units over the rationals, so any nonzero constant input
    yields 1 unless the other argument is zero.
    """
    if p.is_zero():
        return q.primitive() if not q.is_zero() else q
    if q.is_zero():
        return p.primitive()
    if p.is_constant() or q.is_constant():
        return Polynomial.constant(1)
    idx = _pick_main_var(p, q)
    if idx is None:
        return Polynomial.constant(1)
    v = var_by_index(idx)
    cont_p = content_wrt(p, v)
    cont_q = content_wrt(q, v)
    g_cont = gcd_poly(cont_p, cont_q)
    a = exact_div(p, cont_p) if not cont_p.is_constant() else p.primitive()
    b = exact_div(q, cont_q) if not cont_q.is_constant() else q.primitive()
    if a.degree(v) < b.degree(v):
        a, b = b, a
    # primitive PRS
    while not b.is_zero():
        r = prem(a, b, v)
        if r.is_zero():
            a = b
            break
        a, b = b, primitive_wrt(r, v).primitive()
        if b.degree(v) == 0:
            # coprime in v
            a = Polynomial.constant(1)
            b = Polynomial.zero()
            break
    gv = a.primitive() if a.degree(v) > 0 else Polynomial.constant(1)
    return (g_cont * gv).primitive()


def subresultant_prs(p: Polynomial, q: Polynomial, v: VarId) -> list:
    """Fraction-free subresultant polynomial remainder sequence.

    Returns [p, q, r2, ...] down to the last nonzero element, with the
    Collins-Brown normalization dividing each pseudo-remainder by g*h^delta.
    """
    if p.degree(v) < q.degree(v):
        p, q = q, p
    prs = [p, q]
    g = Polynomial.constant(1)
    h = Polynomial.constant(1)
    a, b = p, q
    while b.degree(v) >= 0 and not b.is_zero():
        delta = a.degree(v) - b.degree(v)
        r = prem(a, b, v)
        if r.is_zero():
            break
        divisor = g * h ** delta
        r = exact_div(r, divisor)
        prs.append(r)
        a, b = b, r
        g = a.leading_coefficient(v)
        if delta > 0:
            h = exact_div(g ** delta, h ** (delta - 1))
        if b.degree(v) <= 0:
            break
    return prs


def resultant(p: Polynomial, q: Polynomial, v: VarId) -> Polynomial:
    """Resultant with respect to v: the Sylvester-matrix determinant.

    Computed by the subresultant PRS with exact sign and content tracking.
    When one argument is univariate in v, evaluation-interpolation over the
    other argument's remaining variables replaces the PRS: pseudo-division
    against a high-degree univariate polynomial swells catastrophically,
    while a grid of integer univariate resultants stays cheap.
    """
    dp, dq = p.degree(v), q.degree(v)
    if dp <= 0 and dq <= 0:
        raise BothConstant("resultant requires positive degree in %s" % v.name)
    if p.is_zero() or q.is_zero():
        return Polynomial.zero()
    if dp >= 1 and dq >= 1:
        p_vars = p.variables()
        q_vars = q.variables()
        if p_vars == {v.index} and len(q_vars) > 1 and dp >= 3:
            return _resultant_vs_univariate(p, q, v, swapped=False)
        if q_vars == {v.index} and len(p_vars) > 1 and dq >= 3:
            return _resultant_vs_univariate(q, p, v, swapped=True)
    return _resultant_prs(p, q, v)


def _resultant_prs(p: Polynomial, q: Polynomial, v: VarId) -> Polynomial:
    dp, dq = p.degree(v), q.degree(v)
    sign = 1
    if dp < dq:
        p, q, dp, dq = q, p, dq, dp
        if (dp & 1) and (dq & 1):
            sign = -sign
    if dq == 0:
        return q ** dp if sign > 0 else -(q ** dp)
    # pull integer-primitive contents (rational units tracked separately)
    unit_p, a = p.content_unit()
    unit_q, b = q.content_unit()
    unit = rat(unit_p) ** dq * rat(unit_q) ** dp
    g = Polynomial.constant(1)
    h = Polynomial.constant(1)
    while True:
        da, db = a.degree(v), b.degree(v)
        delta = da - db
        if (da & 1) and (db & 1):
            sign = -sign
        r = prem(a, b, v)
        a = b
        if r.is_zero():
            return Polynomial.zero()
        b = exact_div(r, g * h ** delta)
        g = a.leading_coefficient(v)
        if delta > 0:
            h = exact_div(g ** delta, h ** (delta - 1))
        if b.degree(v) <= 0:
            break
    da = a.degree(v)
    # res = sign * unit * lc(b)^da / h^(da-1); b is v-free here
    num = b ** da
    if da >= 1:
        res = exact_div(num, h ** (da - 1))
    else:
        res = num
    res = res.scale(unit)
    return res if sign > 0 else -res


def _resultant_vs_univariate(d: Polynomial, r: Polynomial, v: VarId,
                             swapped: bool) -> Polynomial:
    """res_v(d, r) for d univariate in v, by evaluation-interpolation.

    swapped=True means the caller wants res(r, d) instead; the two differ
    by (-1)^(deg d * deg r).
    """
    from . import realroots
    from .polynomial import clear_denominators, var_by_index

    d_int = realroots.from_rationals(univ_coeffs(d, v))
    unit_d = _unit_of_scaling(d, v, d_int)
    dd = realroots.degree(d_int)
    unit_r, r_prim = r.content_unit()
    unit = unit_d ** r.degree(v) * rat(unit_r) ** dd

    def recurse(rr: Polynomial, dv: int):
        others = sorted(rr.variables() - {v.index})
        if not others:
            rr_int = realroots.from_rationals(univ_coeffs(rr, v))
            scale = _unit_of_scaling(rr, v, rr_int)
            val = realroots.resultant_int(d_int, rr_int)
            return Polynomial.constant(rat(scale) ** dd * val)
        w = var_by_index(others[-1])
        bound = dd * rr.degree(w) + 1
        lc = rr.leading_coefficient(v)
        nodes = []
        values = []
        j = 0
        while len(nodes) < bound:
            for cand in ((j, -j) if j else (0,)):
                if len(nodes) >= bound:
                    break
                if cand in nodes:
                    continue
                rr_j = rr.evaluate_partial({w: rat(cand)})
                if rr_j.degree(v) != dv:
                    continue
                nodes.append(cand)
                values.append(recurse(rr_j, dv))
            j += 1
            if j > 16 * bound:
                raise ArithmeticError("could not find enough good nodes")
        return _newton_interpolate(w, nodes, values)

    res = recurse(r_prim, r_prim.degree(v)).scale(unit)
    if swapped and (dd * r.degree(v)) % 2 == 1:
        res = -res
    return res


def univ_coeffs(p: Polynomial, v: VarId) -> list:
    return [c.constant_value() for c in p.coefficients(v)]


def _unit_of_scaling(p: Polynomial, v: VarId, p_int) -> "rat":
    """Rational u with p = u * (polynomial with coefficients p_int)."""
    coeffs = univ_coeffs(p, v)
    for orig, scaled in zip(coeffs, p_int):
        if scaled != 0:
            return rat(orig) / rat(int(scaled))
    raise ZeroPolynomial("scaling of the zero polynomial")


def _newton_interpolate(w: VarId, nodes: list, values: list) -> Polynomial:
    """Polynomial-valued Newton interpolation at rational nodes."""
    n = len(nodes)
    coeffs = list(values)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            denom = rat(nodes[i]) - rat(nodes[i - level])
            coeffs[i] = (coeffs[i] - coeffs[i - 1]).scale(1 / denom)
    xw = Polynomial.var(w)
    result = coeffs[n - 1]
    for i in range(n - 2, -1, -1):
        result = result * (xw - Polynomial.constant(nodes[i])) + coeffs[i]
    return result


def subresultant_chain(p: Polynomial, q: Polynomial, v: VarId) -> list:
    """Subresultant polynomials S_0..S_{min(deg p, deg q)}, PRS convention.

    Degree gaps in a defective sequence are filled with the standard
    lc-power similarity fill-in; index 0 carries the resultant up to the
    PRS normalization.  Missing entries are zero polynomials.
    """
    if p.degree(v) < q.degree(v):
        p, q = q, p
    n = q.degree(v)
    if n < 0:
        return []
    chain = [Polynomial.zero() for _ in range(n + 1)]
    if n == 0:
        chain[0] = q ** max(p.degree(v), 1) if p.degree(v) > 0 else q
        return chain
    prs = subresultant_prs(p, q, v)
    if len(prs) >= 2:
        d0, d1 = prs[0].degree(v), prs[1].degree(v)
        if d1 <= n:
            lc1 = prs[1].leading_coefficient(v)
            gap = d0 - d1 - 1
            if 0 <= d1 <= n:
                chain[d1] = prs[1] * lc1 ** gap if gap > 0 else prs[1]
    for i in range(2, len(prs)):
        d_prev = prs[i - 1].degree(v)
        d_cur = prs[i].degree(v)
        if d_prev - 1 <= n and d_prev >= 1:
            chain[d_prev - 1] = prs[i]
        if d_cur < d_prev - 1 and d_cur >= 0:
            lc = prs[i].leading_coefficient(v)
            chain[d_cur] = prs[i] * lc ** (d_prev - d_cur - 1)
    return chain


def principal_subresultant_coefficients(p: Polynomial, q: Polynomial,
                                        v: VarId) -> list:
    """psc_j = coefficient of v^j in the j-th subresultant, j = 0..min deg."""
    chain = subresultant_chain(p, q, v)
    out = []
    for j, s in enumerate(chain):
        coeffs = s.coefficients(v)
        out.append(coeffs[j] if j < len(coeffs) else Polynomial.zero())
    return out


def resultant_and_subresultants(p: Polynomial, q: Polynomial, v: VarId):
    """(resultant, principal subresultant coefficient list) wrt v."""
    res = resultant(p, q, v)
    psc = principal_subresultant_coefficients(p, q, v)
    if psc:
        psc[0] = res
    return res, psc


def discriminant(p: Polynomial, v: VarId) -> Polynomial:
    """disc(p) = (-1)^(n(n-1)/2) res(p, p') / lc(p)."""
    n = p.degree(v)
    if n < 1:
        return Polynomial.zero()
    if n == 1:
        return Polynomial.constant(1)
    res = resultant(p, p.derivative(v), v)
    lc = p.leading_coefficient(v)
    d = exact_div(res, lc)
    if (n * (n - 1) // 2) % 2:
        d = -d
    return d


def squarefree_decomposition(p: Polynomial, v: VarId):
    """Yun decomposition of p with respect to v.

    Returns (unit, factors) where unit is a nonzero rational, factors is a
    list of (polynomial, multiplicity) with the content in the remaining
    variables reported as a multiplicity-1 factor, and
    unit * prod(f^m) == p exactly.
    """
    if p.is_zero():
        raise ZeroPolynomial("squarefree decomposition of zero")
    unit, prim = p.content_unit()
    factors = []
    if prim.degree(v) <= 0:
        if not prim.is_constant():
            factors.append((prim, 1))
        return unit, factors
    cont = content_wrt(prim, v)
    work = prim
    if not cont.is_constant():
        factors.append((cont, 1))
        work = exact_div(prim, cont)
    dwork = work.derivative(v)
    g = gcd_poly(work, dwork)
    if g.is_constant():
        factors.append((work, 1))
    else:
        w = exact_div(work, g)
        y = exact_div(dwork, g)
        i = 1
        while True:
            z = y - w.derivative(v)
            if z.is_zero():
                if w.degree(v) > 0 or not w.is_constant():
                    factors.append((w, i))
                break
            gi = gcd_poly(w, z)
            if not gi.is_constant():
                factors.append((gi, i))
            w = exact_div(w, gi) if not gi.is_constant() else w
            y = exact_div(z, gi) if not gi.is_constant() else z
            i += 1
            if w.is_constant():
                break
    # the factors are primitive up to rationals: recover the exact unit
    prod = Polynomial.constant(1)
    for f, m in factors:
        prod = prod * f ** m
    ratio = try_exact_div(p, prod)
    if ratio is None or not ratio.is_constant():
        raise ArithmeticError("squarefree reassembly failed")
    return ratio.constant_value(), factors


def squarefree_part(p: Polynomial, v: VarId) -> Polynomial:
    """Product of the distinct v-dependent squarefree factors of p."""
    _, factors = squarefree_decomposition(p, v)
    out = Polynomial.constant(1)
    for f, _m in factors:
        if f.degree(v) > 0:
            out = out * f
    return out.primitive()
