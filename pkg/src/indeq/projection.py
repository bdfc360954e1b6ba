"""Projection phase of CAD: normalized factor bases per level and the
Collins-Hong / McCallum projection operators.

Every polynomial entering the factor set is replaced by its canonical
factors: integer-primitive, squarefree, sign-normalized, with content in
lower variables split off recursively.  Factor sets are deduplicated up to
rational scaling and sign, and each factor lives at the level of its
highest variable under the chosen order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .polynomial import Polynomial, VarId
from .polytools import (discriminant, principal_subresultant_coefficients,
                        resultant, squarefree_decomposition)
from .rationals import rat_sign


@dataclass
class FactorBasis:
    """Canonical factor store with dense integer ids."""

    order: tuple                      # lifting order, VarId per level 1..n
    factors: list = field(default_factory=list)        # id -> Polynomial
    levels: list = field(default_factory=list)         # id -> level int
    by_poly: dict = field(default_factory=dict)        # Polynomial -> id
    per_level: dict = field(default_factory=dict)      # level -> [ids]
    level_of_var: dict = field(default_factory=dict)   # var index -> level

    def __post_init__(self):
        self.level_of_var = {v.index: i + 1 for i, v in enumerate(self.order)}

    def poly_level(self, p: Polynomial) -> int:
        lvl = 0
        for idx in p.variables():
            lvl = max(lvl, self.level_of_var[idx])
        return lvl

    def add_factor(self, prim: Polynomial) -> int:
        """Register a canonical factor, returning its id."""
        fid = self.by_poly.get(prim)
        if fid is not None:
            return fid
        fid = len(self.factors)
        self.factors.append(prim)
        lvl = self.poly_level(prim)
        self.levels.append(lvl)
        self.by_poly[prim] = fid
        self.per_level.setdefault(lvl, []).append(fid)
        return fid

    def ids_at_level(self, level: int) -> list:
        return self.per_level.get(level, [])

    def factor_counts(self) -> list:
        """Factors per level 1..n."""
        return [len(self.per_level.get(k, [])) for k in range(1, len(self.order) + 1)]


def canonical_factors(p: Polynomial, basis: FactorBasis, check=None) -> list:
    """Split p into canonical squarefree factors, registering each.

    Returns [(factor id, multiplicity)], with the rational unit discarded
    (callers track the sign separately).  Content in lower variables is
    decomposed recursively.
    """
    out = []
    stack = [(p, 1)]
    while stack:
        q, mult = stack.pop()
        if check is not None:
            check(q)
        if q.is_constant():
            continue
        lvl = basis.poly_level(q)
        v = basis.order[lvl - 1]
        if q.degree(v) == 0:
            # content-only at this level cannot happen: lvl is q's top level
            raise AssertionError("factor level bookkeeping broke")
        _unit, factors = squarefree_decomposition(q, v)
        if len(factors) == 1 and factors[0][1] == 1 \
                and factors[0][0].sign_normalized().primitive() == q.sign_normalized().primitive():
            prim = q.primitive().sign_normalized()
            out.append((basis.add_factor(prim), mult))
            continue
        for f, m in factors:
            stack.append((f, m * mult))
    return out


def atom_sign_data(p: Polynomial, basis: FactorBasis, check=None):
    """(unit sign, [(factor id, multiplicity)], max level) for an atom."""
    unit, _prim = p.content_unit()
    pairs = canonical_factors(p, basis, check=check)
    max_level = max((basis.levels[fid] for fid, _ in pairs), default=0)
    return rat_sign(unit), tuple(sorted(pairs)), max_level


def _reducta_chain(f: Polynomial, v: VarId) -> list:
    """Reducta of f in v, truncated once the leading coefficient is a
    nonvanishing constant (standard Collins optimization)."""
    out = []
    coeffs = f.coefficients(v)
    top = len(coeffs) - 1
    while top >= 1:
        out.append(f)
        lc = coeffs[top]
        if lc.is_constant() and not lc.is_zero():
            break
        f = f - Polynomial.var(v) ** top * lc
        coeffs = coeffs[:top]
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        top = len(coeffs) - 1
    return out


def _truncated_coefficients(f: Polynomial, v: VarId) -> list:
    """Coefficients of f in v from the top down, stopping after the first
    nonzero constant one (which can never vanish)."""
    out = []
    for c in reversed(f.coefficients(v)):
        if c.is_zero():
            continue
        out.append(c)
        if c.is_constant():
            break
    return out


def project_level(basis: FactorBasis, level: int, operator: str,
                  check: Optional[Callable] = None) -> list:
    """Project the level-k factor set one level down.

    Returns the ids of newly registered factors (all at levels < k).
    operator is 'collins' (Collins' operator with Hong's smaller pair set)
    or 'mccallum' (coefficients + discriminants + pairwise resultants).
    """
    v = basis.order[level - 1]
    ids = list(basis.ids_at_level(level))
    fs = [basis.factors[fid] for fid in ids]
    before = len(basis.factors)
    outputs: list = []

    def emit(p: Polynomial):
        if p is None or p.is_zero() or p.is_constant():
            return
        outputs.append(p)

    probe = (lambda: check(None)) if check is not None else (lambda: None)

    if operator == "mccallum":
        for f in fs:
            probe()
            for c in _truncated_coefficients(f, v):
                emit(c)
            if f.degree(v) >= 2:
                emit(discriminant(f, v))
        for i in range(len(fs)):
            for j in range(i + 1, len(fs)):
                probe()
                emit(resultant(fs[i], fs[j], v))
    else:
        for f in fs:
            for g in _reducta_chain(f, v):
                probe()
                dg = g.degree(v)
                emit(g.leading_coefficient(v))
                if dg >= 2:
                    for pc in principal_subresultant_coefficients(
                            g, g.derivative(v), v):
                        emit(pc)
        for i in range(len(fs)):
            for j in range(i + 1, len(fs)):
                for fr in _reducta_chain(fs[i], v):
                    probe()
                    if fr.degree(v) >= 1 and fs[j].degree(v) >= 1:
                        for pc in principal_subresultant_coefficients(
                                fr, fs[j], v):
                            emit(pc)

    new_ids = []
    for p in outputs:
        for fid, _m in canonical_factors(p, basis, check=check):
            if fid >= before and fid not in new_ids:
                new_ids.append(fid)
    return new_ids


def project_all(basis: FactorBasis, operator: str,
                check: Optional[Callable] = None) -> None:
    """Run projection from the top level down to level 2."""
    for level in range(len(basis.order), 1, -1):
        project_level(basis, level, operator, check=check)
