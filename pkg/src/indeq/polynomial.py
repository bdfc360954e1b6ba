"""Sparse exact multivariate polynomials over arbitrary-precision rationals.

Monomials are tuples of (variable index, exponent) pairs sorted by index
with all exponents positive; the empty tuple is the constant monomial.
Coefficients are exact rationals; no zero coefficient is ever stored, so
structural equality of the term maps is polynomial equality.  Values are
immutable after construction and safe to share between workers.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import MissingVariable
from .rationals import (RAT_ONE, RAT_ZERO, Rat, int_gcd, int_lcm, rat,
                        rat_den, rat_num, rat_sign, rat_str)

Monomial = tuple  # tuple[tuple[int, int], ...]

_MONO_ONE: Monomial = ()


@dataclass(frozen=True)
class VarId:
    """A variable: dense session-stable index plus unique display name."""

    index: int
    name: str

    def __repr__(self):
        return "VarId(%d, %r)" % (self.index, self.name)


class _Registry:
    """Session-wide interning of variable names to VarIds.

    Indices are dense and stable within one session.  Interning is the
    only mutable state in this module; it only ever grows.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._by_name: dict[str, VarId] = {}
        self._by_index: list[VarId] = []

    def intern(self, name: str) -> VarId:
        v = self._by_name.get(name)
        if v is not None:
            return v
        with self._lock:
            v = self._by_name.get(name)
            if v is None:
                v = VarId(len(self._by_index), name)
                self._by_index.append(v)
                self._by_name[name] = v
            return v

    def lookup(self, name: str) -> Optional[VarId]:
        return self._by_name.get(name)

    def by_index(self, index: int) -> VarId:
        return self._by_index[index]


_registry = _Registry()


def variable(name: str) -> VarId:
    """Intern a variable name, returning its session VarId."""
    return _registry.intern(name)


def lookup_variable(name: str) -> Optional[VarId]:
    return _registry.lookup(name)


def var_by_index(index: int) -> VarId:
    return _registry.by_index(index)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    """Graded lexicographic key over VarId index (higher key = later term).

    Sorting monomials by this key descending puts the leading term (highest
    total degree, then lexicographically largest in the lowest-index
    variables) first.
    """
    # lex tiebreak: higher exponent on a lower index wins
    return (_mono_degree(m), tuple((-v, e) for v, e in m))


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    """Does monomial a divide b?"""
    db = dict(b)
    for v, e in a:
        if db.get(v, 0) < e:
            return False
    return True


def _mono_div(a: Monomial, b: Monomial) -> Monomial:
    """a / b, assuming divisibility."""
    db = dict(b)
    out = []
    for v, e in a:
        r = e - db.get(v, 0)
        if r:
            out.append((v, r))
    return tuple(out)


class Polynomial:
    """Immutable sparse multivariate polynomial with exact rational terms."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Rat]):
        self.terms = {m: c for m, c in terms.items() if c != 0}
        self._hash = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return _P_ZERO

    @staticmethod
    def constant(q) -> "Polynomial":
        q = rat(q)
        if q == 0:
            return _P_ZERO
        return Polynomial({_MONO_ONE: q})

    @staticmethod
    def var(v: VarId, exp: int = 1) -> "Polynomial":
        if exp < 0:
            raise ValueError("negative exponent")
        if exp == 0:
            return _P_ONE
        return Polynomial({((v.index, exp),): RAT_ONE})

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _MONO_ONE in self.terms)

    def constant_value(self) -> Rat:
        """The value of a constant polynomial."""
        if not self.terms:
            return RAT_ZERO
        return self.terms[_MONO_ONE]

    def variables(self) -> set:
        """Set of variable indices occurring in this polynomial."""
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def degree(self, v: VarId) -> int:
        """Degree in v; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        vi = v.index
        best = 0
        for m in self.terms:
            for idx, e in m:
                if idx == vi and e > best:
                    best = e
        return best

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(_mono_degree(m) for m in self.terms)

    def sorted_terms(self):
        """Terms in canonical order, leading term first."""
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)

    def leading_key(self):
        return max(_mono_key(m) for m in self.terms)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s == 0:
                    del out[m]
                else:
                    out[m] = s
        p = Polynomial.__new__(Polynomial)
        p.terms = out
        p._hash = None
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Polynomial.__new__(Polynomial)
        p.terms = {m: -c for m, c in self.terms.items()}
        p._hash = None
        return p

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b = self.terms, other.terms
        if not a or not b:
            return _P_ZERO
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = _mono_mul(ma, mb)
                c = out.get(m)
                if c is None:
                    out[m] = ca * cb
                else:
                    c = c + ca * cb
                    if c == 0:
                        del out[m]
                    else:
                        out[m] = c
        p = Polynomial.__new__(Polynomial)
        p.terms = out
        p._hash = None
        return p

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = _P_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def scale(self, q) -> "Polynomial":
        q = rat(q)
        if q == 0:
            return _P_ZERO
        p = Polynomial.__new__(Polynomial)
        p.terms = {m: c * q for m, c in self.terms.items()}
        p._hash = None
        return p

    # -- structure ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(frozenset(self.terms.items()))
            self._hash = h
        return h

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return "Polynomial(%s)" % self.to_text()

    # -- calculus / substitution -------------------------------------------

    def derivative(self, v: VarId) -> "Polynomial":
        vi = v.index
        out: dict = {}
        for m, c in self.terms.items():
            for k, (idx, e) in enumerate(m):
                if idx == vi:
                    if e == 1:
                        nm = m[:k] + m[k + 1:]
                    else:
                        nm = m[:k] + ((idx, e - 1),) + m[k + 1:]
                    prev = out.get(nm)
                    nc = c * e
                    out[nm] = nc if prev is None else prev + nc
                    break
        return Polynomial(out)

    def evaluate(self, assignment: Mapping[VarId, Rat]) -> Rat:
        """Exact value under a total assignment of this polynomial's variables."""
        by_index = {v.index: rat(q) for v, q in assignment.items()}
        total = RAT_ZERO
        for m, c in self.terms.items():
            val = c
            for idx, e in m:
                x = by_index.get(idx)
                if x is None:
                    raise MissingVariable(
                        "variable %r has no assigned value" % var_by_index(idx).name)
                val = val * x ** e
            total = total + val
        return total

    def evaluate_partial(self, assignment: Mapping[VarId, Rat]) -> "Polynomial":
        """Substitute rational values for a subset of the variables."""
        by_index = {v.index: rat(q) for v, q in assignment.items()}
        out: dict = {}
        for m, c in self.terms.items():
            rest = []
            for idx, e in m:
                x = by_index.get(idx)
                if x is None:
                    rest.append((idx, e))
                else:
                    c = c * x ** e
            if c == 0:
                continue
            nm = tuple(rest)
            prev = out.get(nm)
            out[nm] = c if prev is None else prev + c
        return Polynomial(out)

    def substitute(self, v: VarId, q: "Polynomial") -> "Polynomial":
        """Replace every occurrence of v by the polynomial q, expanded."""
        deg = self.degree(v)
        if deg <= 0:
            return self
        # Horner on the coefficients of v
        coeffs = self.coefficients(v)
        result = coeffs[deg]
        for e in range(deg - 1, -1, -1):
            result = result * q + coeffs[e]
        return result

    def coefficients(self, v: VarId) -> list:
        """Coefficients of v^0 .. v^deg as polynomials in the other variables."""
        vi = v.index
        deg = max(self.degree(v), 0)
        buckets: list[dict] = [dict() for _ in range(deg + 1)]
        for m, c in self.terms.items():
            e_v = 0
            rest = []
            for idx, e in m:
                if idx == vi:
                    e_v = e
                else:
                    rest.append((idx, e))
            buckets[e_v][tuple(rest)] = c
        return [Polynomial(b) for b in buckets]

    def leading_coefficient(self, v: VarId) -> "Polynomial":
        d = self.degree(v)
        if d <= 0:
            return self
        return self.coefficients(v)[d]

    def shift_var(self, v: VarId, offset) -> "Polynomial":
        """Substitute v := v + offset for a rational offset."""
        return self.substitute(v, Polynomial.var(v) + Polynomial.constant(offset))

    # -- normal forms --------------------------------------------------------

    def content_unit(self):
        """(unit, primitive): unit is a rational > 0 or < 0 with
        self = unit * primitive, primitive having coprime integer
        coefficients and positive leading coefficient."""
        if not self.terms:
            return RAT_ONE, self
        num_gcd = 0
        den_lcm = 1
        for c in self.terms.values():
            num_gcd = int_gcd(num_gcd, abs(rat_num(c)))
            den_lcm = int_lcm(den_lcm, rat_den(c))
        unit = Rat(num_gcd, den_lcm)
        lead = self.terms[max(self.terms, key=_mono_key)]
        if lead < 0:
            unit = -unit
        inv = 1 / unit
        prim = self.scale(inv)
        return unit, prim

    def primitive(self) -> "Polynomial":
        return self.content_unit()[1]

    def sign_normalized(self) -> "Polynomial":
        """Same polynomial up to sign, with positive leading coefficient."""
        if not self.terms:
            return self
        lead = self.terms[max(self.terms, key=_mono_key)]
        return -self if lead < 0 else self

    # -- text ----------------------------------------------------------------

    def to_text(self, name_of: Optional[Callable[[int], str]] = None) -> str:
        """Canonical text: num/den coefficients, ^ powers, explicit *."""
        if not self.terms:
            return "0"
        if name_of is None:
            name_of = lambda idx: var_by_index(idx).name
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for idx, e in m:
                n = name_of(idx)
                factors.append(n if e == 1 else "%s^%d" % (n, e))
            if not factors:
                body = rat_str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = rat_str(abs(c)) + "*" + "*".join(factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append((" + " if c > 0 else " - ") + body)
        return "".join(parts)


def _coerce(x) -> Optional[Polynomial]:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Rat)) or type(x).__name__ in ("mpq", "mpz", "Fraction"):
        return Polynomial.constant(x)
    return None


_P_ZERO = Polynomial({})
_P_ONE = Polynomial({_MONO_ONE: RAT_ONE})


def poly_from_int_coeffs(coeffs: Sequence[int], v: VarId) -> Polynomial:
    """Univariate polynomial from ascending integer/rational coefficients."""
    terms = {}
    for e, c in enumerate(coeffs):
        if c:
            terms[((v.index, e),) if e else _MONO_ONE] = rat(c)
    return Polynomial(terms)


def univariate_coeffs(p: Polynomial, v: VarId) -> list:
    """Ascending rational coefficient list of a univariate polynomial.

    Raises ValueError if p involves any variable other than v.
    """
    extra = p.variables() - {v.index}
    if extra:
        names = ", ".join(sorted(var_by_index(i).name for i in extra))
        raise ValueError("polynomial is not univariate in %s (also uses %s)"
                         % (v.name, names))
    out = [RAT_ZERO] * (max(p.degree(v), 0) + 1)
    for m, c in p.terms.items():
        e = m[0][1] if m else 0
        out[e] = c
    return out


def clear_denominators(coeffs: Iterable[Rat]) -> list:
    """Scale ascending rational coefficients to coprime integers (primitive)."""
    coeffs = list(coeffs)
    den = 1
    for c in coeffs:
        den = int_lcm(den, rat_den(c))
    ints = [rat_num(c) * (den // rat_den(c)) for c in coeffs]
    g = 0
    for c in ints:
        g = int_gcd(g, abs(c))
    if g > 1:
        ints = [c // g for c in ints]
    return ints


def arith(op: str, a: Polynomial, b) -> Polynomial:
    """Named dispatch for the ring operations (add, sub, mul, neg, pow)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "pow":
        return a ** b
    raise ValueError("unknown operation %r" % op)
