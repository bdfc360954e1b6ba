"""Decision procedure for closed Tarski formulas over the reals by
cylindrical algebraic decomposition.

The engine builds the projection factor set of the matrix polynomials
under a chosen variable order, lifts level by level with exact sample
points, evaluates atoms through cached factor signs, and combines cell
truth values through the quantifier prefix.  Lifting is partial: a cell
whose matrix value is already determined is not refined further, and a
quantifier stops at its first decisive child.

Resource caps (cell count, wall clock, intermediate size) abort with a
clean ResourceLimitExceeded carrying the statistics so far.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from . import realroots
from .algebraic import (EMPTY_SAMPLE, AlgebraicNumber, SamplePoint, compare,
                        make_root, sign_at)
from .errors import NotClosed, ResourceLimitExceeded
from .formula import (FALSE, TRUE, And, Atom, FalseF, Formula, Or, Rel, TrueF,
                      free_variables)
from .passes import PrenexFormula, lower_abs, simplify, to_prenex
from .polynomial import Polynomial, VarId, poly_from_int_coeffs, var_by_index
from .polytools import primitive_wrt, resultant
from .projection import FactorBasis, atom_sign_data, project_level
from .rationals import (RAT_ZERO, Rat, rat, rat_ceil, rat_floor,
                        simplest_between)


@dataclass
class EngineConfig:
    variable_order: Optional[list] = None   # explicit list of VarIds
    projection: str = "collins"              # 'collins' | 'mccallum'
    max_cells: int = 1_000_000
    timeout: float = 300.0                   # seconds
    parallel: bool = False
    jobs: int = 1
    presubstitute: bool = True
    max_poly_terms: int = 200_000            # intermediate swell guard
    trace: Optional[Callable[[str], None]] = None
    deadline: Optional[float] = None         # absolute monotonic deadline

    def copy(self, **overrides) -> "EngineConfig":
        data = dict(self.__dict__)
        data.update(overrides)
        return EngineConfig(**data)

    def with_deadline(self) -> "EngineConfig":
        if self.deadline is not None:
            return self
        return self.copy(deadline=time.monotonic() + self.timeout)


@dataclass
class DecisionStats:
    cells: int = 0
    factors_per_level: list = field(default_factory=list)
    elapsed_ms: int = 0
    result: Optional[bool] = None
    peak_bytes_estimate: int = 0
    presubstituted: list = field(default_factory=list)

    def as_json_dict(self) -> dict:
        return {
            "cells": self.cells,
            "factors_per_level": list(self.factors_per_level),
            "elapsed_ms": self.elapsed_ms,
            "result": self.result,
            "peak_bytes_estimate": self.peak_bytes_estimate,
            "presubstituted": list(self.presubstituted),
        }


class _Limiter:
    """Shared deadline / size / cell-count enforcement."""

    def __init__(self, cfg: EngineConfig, stats: DecisionStats):
        self.cfg = cfg
        self.stats = stats
        self.deadline = cfg.deadline

    def probe(self, poly: Optional[Polynomial] = None):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ResourceLimitExceeded("timeout exceeded", self.stats)
        if poly is not None and len(poly.terms) > self.cfg.max_poly_terms:
            raise ResourceLimitExceeded(
                "intermediate polynomial exceeded %d terms"
                % self.cfg.max_poly_terms, self.stats)

    def count_cells(self, n: int):
        self.stats.cells += n
        if self.stats.cells > self.cfg.max_cells:
            raise ResourceLimitExceeded(
                "cell cap %d exceeded" % self.cfg.max_cells, self.stats)


# -- variable ordering ---------------------------------------------------------


def _quantifier_blocks(prefix) -> list:
    blocks = []
    for q, v in prefix:
        if blocks and blocks[-1][0] == q:
            blocks[-1][1].append(v)
        else:
            blocks.append((q, [v]))
    return blocks


def _atom_polys(matrix: Formula) -> list:
    out = []

    def walk(g):
        if isinstance(g, Atom):
            out.append(g.poly)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (TrueF, FalseF)):
            pass
        else:
            raise TypeError("matrix must be quantifier-free NNF: %r" % (g,))

    walk(matrix)
    return out


def choose_variable_order(pf: PrenexFormula,
                          explicit: Optional[list] = None) -> list:
    """Lifting order (level 1 first, the variable eliminated last).

    Quantifier blocks are respected: inner blocks are eliminated before
    outer ones.  Within a block, the variable with the lowest
    degree-times-occurrence product is eliminated first (so guards on
    cheap outer variables prune early); ties break on VarId index.  An
    explicit order is used verbatim after a block-compatibility check.
    """
    prefix_vars = {v.index for _q, v in pf.prefix}
    if explicit is not None:
        explicit = [v for v in explicit if v.index in prefix_vars]
        _validate_explicit_order(pf, explicit)
        return list(explicit)
    polys = _atom_polys(pf.matrix)
    score = {}
    for _q, v in pf.prefix:
        max_deg = 0
        occ = 0
        for p in polys:
            d = p.degree(v)
            if d > 0:
                occ += 1
                max_deg = max(max_deg, d)
        score[v.index] = max_deg * occ
    order = []
    for _q, vs in _quantifier_blocks(pf.prefix):
        # lifted early = eliminated late = high product
        order.extend(sorted(vs, key=lambda v: (-score[v.index], v.index)))
    return order


def _validate_explicit_order(pf: PrenexFormula, order: list):
    prefix_vars = [v for _q, v in pf.prefix]
    if sorted(v.index for v in order) != sorted(v.index for v in prefix_vars):
        raise ValueError("explicit order must be a permutation of the "
                         "quantified variables")
    quant = {v.index: q for q, v in pf.prefix}
    pos_prefix = {v.index: i for i, (_q, v) in enumerate(pf.prefix)}
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            a, b = order[i].index, order[j].index
            if quant[a] != quant[b] and pos_prefix[a] > pos_prefix[b]:
                raise ValueError(
                    "explicit order swaps differently-quantified variables "
                    "%s and %s" % (order[i].name, order[j].name))


# -- presubstitution of linear equational constraints ---------------------------


def _linear_bounds_from_guards(guards: list) -> dict:
    """Per-variable interval bounds implied by the FALSITY of the guards.

    The guards are disjuncts of the matrix; on the region of interest they
    are all false, so each univariate linear guard atom contributes the
    negated constraint.  Returns {var index: (lo, lo_strict, hi, hi_strict)}.
    """
    bounds: dict = {}

    def update(idx, lo=None, lo_s=False, hi=None, hi_s=False):
        clo, clo_s, chi, chi_s = bounds.get(idx, (None, False, None, False))
        if lo is not None and (clo is None or lo > clo or (lo == clo and lo_s)):
            clo, clo_s = lo, lo_s
        if hi is not None and (chi is None or hi < chi or (hi == chi and hi_s)):
            chi, chi_s = hi, hi_s
        bounds[idx] = (clo, clo_s, chi, chi_s)

    for g in guards:
        if not isinstance(g, Atom):
            continue
        p = g.poly
        vs = list(p.variables())
        if len(vs) != 1:
            continue
        v = var_by_index(vs[0])
        if p.degree(v) != 1:
            continue
        coeffs = p.coefficients(v)
        a = coeffs[1].constant_value()
        b = coeffs[0].constant_value()
        x0 = -b / a
        if g.rel is Rel.GE:
            # hypothesis: a*v + b < 0
            if a > 0:
                update(vs[0], hi=x0, hi_s=True)
            else:
                update(vs[0], lo=x0, lo_s=True)
        elif g.rel is Rel.GT:
            # hypothesis: a*v + b <= 0
            if a > 0:
                update(vs[0], hi=x0, hi_s=False)
            else:
                update(vs[0], lo=x0, lo_s=False)
        elif g.rel is Rel.NE:
            # hypothesis: a*v + b = 0
            update(vs[0], lo=x0, lo_s=False, hi=x0, hi_s=False)
        # Rel.EQ: hypothesis is an excluded point, no interval information
    return bounds


def _positive_on_region(c: Polynomial, bounds: dict) -> bool:
    """Syntactic proof that c > 0 wherever the bounds hold.

    Lower-bounded variables are shifted to v' >= 0 (or > 0 when strict),
    upper-bounded ones reflected; c is positive when all coefficients of
    the shifted polynomial are positive and either its constant term is
    positive or some monomial involves only strictly-positive variables.
    """
    work = c
    strict_vars = set()
    for idx in list(c.variables()):
        lo, lo_s, hi, hi_s = bounds.get(idx, (None, False, None, False))
        v = var_by_index(idx)
        if lo is not None:
            work = work.substitute(v, Polynomial.var(v) + Polynomial.constant(lo))
            if lo_s:
                strict_vars.add(idx)
        elif hi is not None:
            work = work.substitute(v, Polynomial.constant(hi) - Polynomial.var(v))
            if hi_s:
                strict_vars.add(idx)
        else:
            return False
    if work.is_zero():
        return False
    if any(coeff < 0 for coeff in work.terms.values()):
        return False
    const = work.terms.get((), RAT_ZERO)
    if const > 0:
        return True
    for m, _coeff in work.terms.items():
        if m and all(idx in strict_vars for idx, _e in m):
            return True
    return False


def presubstitute_linear_equations(pf: PrenexFormula,
                                   cfg: Optional[EngineConfig] = None,
                                   record: Optional[list] = None) -> PrenexFormula:
    """Eliminate universally quantified variables bound by linear equations.

    Fires on NNF matrices of the form (e != 0) or Rest, where the
    disequation is the negation of a hypothesis equation c(u)*v = r(u)
    linear in v, and the sign of c is fixed on the region where all v-free
    disjuncts are false (shown syntactically from linear guards, or by a
    small recursive decision).  v is then eliminated by substituting
    v := r/c with denominators cleared sign-safely.  Inapplicable formulas
    are returned unchanged; only all-universal prefixes are eligible.
    """
    if cfg is None:
        cfg = EngineConfig()
    if any(q != "forall" for q, _v in pf.prefix):
        return pf
    matrix = simplify(pf.matrix)
    prefix = list(pf.prefix)
    changed = True
    while changed and not isinstance(matrix, (TrueF, FalseF)):
        changed = False
        disjuncts = list(matrix.args) if isinstance(matrix, Or) else [matrix]
        for d in disjuncts:
            if not (isinstance(d, Atom) and d.rel is Rel.NE):
                continue
            e = d.poly
            # prefer the newest (highest-index) variable: recurrence
            # equations are linear in the term they define
            for q, v in sorted(prefix, key=lambda t: -t[1].index):
                if e.degree(v) != 1:
                    continue
                coeffs = e.coefficients(v)
                c = coeffs[1]
                if v.index in c.variables():
                    continue
                others = [g for g in disjuncts if g is not d]
                guards = [g for g in others
                          if isinstance(g, Atom)
                          and v.index not in g.poly.variables()]
                bounds = _linear_bounds_from_guards(guards)
                if _positive_on_region(c, bounds):
                    csign = 1
                elif _positive_on_region(-c, bounds):
                    csign = -1
                else:
                    csign = _sign_by_decision(c, guards, prefix, cfg)
                    if csign == 0:
                        continue
                num = -coeffs[0]
                new_disjuncts = [
                    _substitute_solution(g, v, num, c, csign) for g in others]
                matrix = simplify(Or.of(*new_disjuncts))
                prefix = [(q2, v2) for q2, v2 in prefix if v2 != v]
                if record is not None:
                    record.append(v.name)
                changed = True
                break
            if changed:
                break
    return PrenexFormula(tuple(prefix), matrix)


def _sign_by_decision(c: Polynomial, guards: list, prefix,
                      cfg: EngineConfig) -> int:
    """Fixed sign of c via a small recursive decision call, or 0."""
    sub = cfg.copy(max_cells=20_000, presubstitute=False, variable_order=None,
                   parallel=False, trace=None)
    for cand, s in ((c, 1), (-c, -1)):
        test = simplify(Or.of(*(guards + [Atom.normalized(cand, Rel.GT)])))
        vars_needed = free_variables(test)
        sub_pf = PrenexFormula(
            tuple((q2, v2) for q2, v2 in prefix if v2 in vars_needed), test)
        try:
            truth, _stats = decide(sub_pf, sub)
        except ResourceLimitExceeded:
            continue
        if truth:
            return s
    return 0


def _substitute_solution(g: Formula, v: VarId, num: Polynomial,
                         den: Polynomial, den_sign: int) -> Formula:
    """g with v := num/den substituted, denominators cleared.

    Each atom p REL 0 of degree k in v becomes den^k * p(num/den) REL 0,
    with the relation direction fixed for order relations when den^k is
    negative (k odd and den < 0 on the region).
    """
    if isinstance(g, (TrueF, FalseF)):
        return g
    if isinstance(g, (And, Or)):
        return type(g)(tuple(
            _substitute_solution(a, v, num, den, den_sign) for a in g.args))
    if isinstance(g, Atom):
        p = g.poly
        k = p.degree(v)
        if k <= 0:
            return g
        coeffs = p.coefficients(v)
        acc = coeffs[k]
        for i in range(k - 1, -1, -1):
            acc = acc * num + coeffs[i] * den ** (k - i)
        if den_sign < 0 and k % 2 == 1 and g.rel in (Rel.GE, Rel.GT):
            acc = -acc
        return Atom.normalized(acc, g.rel)
    raise TypeError("unexpected node in NNF matrix: %r" % (g,))


# -- tri-valued matrix evaluation ------------------------------------------------


class _AtomInfo:
    __slots__ = ("unit_sign", "pairs", "level", "rel")

    def __init__(self, unit_sign, pairs, level, rel):
        self.unit_sign = unit_sign
        self.pairs = pairs
        self.level = level
        self.rel = rel


def _eval_tri(matrix, atom_info: dict, signs: list, level: int):
    """Three-valued truth of the matrix given factor signs up to level."""

    def walk(g):
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, Atom):
            info = atom_info[g]
            if info.level > level:
                return None
            s = info.unit_sign
            for fid, mult in info.pairs:
                fs = signs[fid]
                if fs == 0:
                    s = 0
                    break
                if fs < 0 and mult % 2 == 1:
                    s = -s
            return info.rel.holds(s)
        if isinstance(g, And):
            out = True
            for a in g.args:
                r = walk(a)
                if r is False:
                    return False
                if r is None:
                    out = None
            return out
        if isinstance(g, Or):
            out = False
            for a in g.args:
                r = walk(a)
                if r is True:
                    return True
                if r is None:
                    out = None
            return out
        raise TypeError("unexpected node in matrix: %r" % (g,))

    return walk(matrix)


# -- stacks and lifting ----------------------------------------------------------


class _Cell:
    __slots__ = ("coord", "signs", "is_section")

    def __init__(self, coord, signs, is_section):
        self.coord = coord
        self.signs = signs
        self.is_section = is_section


def _upper_bound(coord) -> Rat:
    return coord.hi if isinstance(coord, AlgebraicNumber) else rat(coord)


def _lower_bound(coord) -> Rat:
    return coord.lo if isinstance(coord, AlgebraicNumber) else rat(coord)


def _separate(a, b):
    """Refine until sup(a) < inf(b); a, b are ascending distinct points."""
    while True:
        ga, gb = _upper_bound(a), _lower_bound(b)
        if ga < gb:
            return ga, gb
        progressed = False
        if isinstance(a, AlgebraicNumber):
            a.ensure_width(a.width() / 4)
            progressed = True
        if isinstance(b, AlgebraicNumber):
            b.ensure_width(b.width() / 4)
            progressed = True
        if not progressed:
            raise AssertionError("distinct stack points compare equal")


class _Engine:
    def __init__(self, pf: PrenexFormula, order: list, cfg: EngineConfig,
                 stats: DecisionStats):
        self.cfg = cfg
        self.stats = stats
        self.limiter = _Limiter(cfg, stats)
        self.order = order
        self.prefix = {v.index: q for q, v in pf.prefix}
        self.matrix = pf.matrix
        self.basis = FactorBasis(tuple(order))
        self.atom_info: dict = {}
        self.mccallum_failed = False
        self._collect_atoms()

    def _collect_atoms(self):
        def walk(g):
            if isinstance(g, Atom):
                if g not in self.atom_info:
                    unit_sign, pairs, level = atom_sign_data(
                        g.poly, self.basis, check=self.limiter.probe)
                    self.atom_info[g] = _AtomInfo(unit_sign, pairs, level,
                                                  g.rel)
            elif isinstance(g, (And, Or)):
                for a in g.args:
                    walk(a)

        walk(self.matrix)

    def project(self):
        for level in range(len(self.order), 1, -1):
            project_level(self.basis, level, self.cfg.projection,
                          check=self.limiter.probe)
        self.stats.factors_per_level = self.basis.factor_counts()
        self._estimate_memory()
        if self.cfg.trace:
            for level in range(1, len(self.order) + 1):
                polys = [self.basis.factors[fid].to_text()
                         for fid in self.basis.ids_at_level(level)]
                self.cfg.trace("level %d (%s): [%s]" % (
                    level, self.order[level - 1].name, ", ".join(polys)))

    def _estimate_memory(self):
        total = 0
        for f in self.basis.factors:
            for m, c in f.terms.items():
                total += 48 + 16 * len(m)
                total += (int(c.numerator).bit_length()
                          + int(c.denominator).bit_length()) // 8
        self.stats.peak_bytes_estimate = max(
            self.stats.peak_bytes_estimate, total + 128 * self.stats.cells)

    # -- stack over a sample point -------------------------------------------

    def build_stack(self, level: int, sample: SamplePoint) -> list:
        self.limiter.probe()
        v = self.order[level - 1]
        ids = self.basis.ids_at_level(level)
        rational_sample = not sample.algebraic_part()
        factor_data = {}
        for fid in ids:
            f = self.basis.factors[fid]
            if rational_sample:
                factor_data[fid] = self._specialize_rational(f, v, sample)
            else:
                factor_data[fid] = self._specialize_algebraic(f, v, sample)
        # merge the genuine roots of all factors into one ascending list
        merged: list = []  # [coordinate, {owning fid}]
        for fid in ids:
            data = factor_data[fid]
            if data[0] != "poly":
                continue
            for root in data[2]:
                placed = False
                for k, entry in enumerate(merged):
                    c = compare(root, entry[0])
                    if c == 0:
                        entry[1].add(fid)
                        placed = True
                        break
                    if c < 0:
                        merged.insert(k, [root, {fid}])
                        placed = True
                        break
                if not placed:
                    merged.append([root, {fid}])
        # cell coordinates: sector, section, sector, ...
        if not merged:
            coords = [RAT_ZERO]
            kinds = [False]
        else:
            coords = [Rat(rat_floor(_lower_bound(merged[0][0])) - 1)]
            kinds = [False]
            for i, entry in enumerate(merged):
                coords.append(entry[0])
                kinds.append(True)
                if i + 1 < len(merged):
                    ga, gb = _separate(entry[0], merged[i + 1][0])
                    coords.append(simplest_between(ga, gb))
                    kinds.append(False)
            coords.append(Rat(rat_ceil(_upper_bound(merged[-1][0])) + 1))
            kinds.append(False)
        # per-factor signs on every cell of the stack
        root_positions: dict = {}
        for pos, entry in enumerate(merged):
            for fid in entry[1]:
                root_positions.setdefault(fid, []).append(2 * pos + 1)
        cells_signs = [dict() for _ in coords]
        for fid in ids:
            data = factor_data[fid]
            if data[0] == "zero":
                for cs in cells_signs:
                    cs[fid] = 0
                continue
            if data[0] == "const":
                for cs in cells_signs:
                    cs[fid] = data[1]
                continue
            pattern = data[3]
            own = root_positions.get(fid, [])
            own_set = set(own)
            gap = 0
            for pos in range(len(coords)):
                if pos in own_set:
                    cells_signs[pos][fid] = 0
                    gap += 1
                else:
                    cells_signs[pos][fid] = pattern[gap]
        cells = [_Cell(coords[pos], cells_signs[pos], kinds[pos])
                 for pos in range(len(coords))]
        self.limiter.count_cells(len(cells))
        return cells

    def _specialize_rational(self, f: Polynomial, v: VarId,
                             sample: SamplePoint):
        """('zero',) | ('const', sign) | ('poly', f, roots, gap signs)."""
        q = f.evaluate_partial(sample.rational_part())
        coeffs = realroots.from_rationals(
            c.constant_value() for c in q.coefficients(v))
        if not coeffs:
            if self.cfg.projection == "mccallum":
                self.mccallum_failed = True
            return ("zero",)
        if len(coeffs) == 1:
            return ("const", 1 if coeffs[0] > 0 else -1)
        sf = realroots.squarefree_part_int(coeffs)
        roots = [make_root(r) for r in realroots.isolate_sqfree(sf)]
        pattern = []
        for t in self._gap_points(roots):
            s = realroots.sign_at(coeffs, t)
            if s == 0:
                raise AssertionError("sector test point hit a root")
            pattern.append(s)
        return ("poly", f, roots, pattern)

    def _gap_points(self, roots: list) -> list:
        """Rational test points interleaving an ascending root list."""
        if not roots:
            return [RAT_ZERO]
        pts = [Rat(rat_floor(_lower_bound(roots[0])) - 1)]
        for i in range(len(roots) - 1):
            ga, gb = _separate(roots[i], roots[i + 1])
            pts.append(simplest_between(ga, gb))
        pts.append(Rat(rat_ceil(_upper_bound(roots[-1])) + 1))
        return pts

    def _specialize_algebraic(self, f: Polynomial, v: VarId,
                              sample: SamplePoint):
        q = f.evaluate_partial(sample.rational_part())
        alg = {w: a for w, a in sample.algebraic_part().items()
               if w.index in q.variables()}
        if not alg:
            # the factor does not touch the algebraic coordinates
            return self._specialize_rational(f, v, sample)
        # true degree via exact top-down coefficient sign tests
        coeffs = q.coefficients(v)
        top = len(coeffs) - 1
        top_sign = 0
        while top >= 0:
            c = coeffs[top]
            if not c.is_zero():
                top_sign = sign_at(c, sample)
                if top_sign != 0:
                    break
            top -= 1
        if top < 0:
            if self.cfg.projection == "mccallum":
                self.mccallum_failed = True
            return ("zero",)
        if top == 0:
            return ("const", top_sign)
        # candidate roots: eliminate the algebraic coordinates by resultants
        # from the v-primitive part (re-primitivized between steps so the
        # eliminant cannot vanish identically)
        r = primitive_wrt(q, v)
        for w, a in alg.items():
            if w.index not in r.variables():
                continue
            d = poly_from_int_coeffs(list(a.defining), w)
            r = resultant(d, r, w)
            self.limiter.probe(r)
            r = primitive_wrt(r, v)
        cand_int = realroots.to_int_poly(r, v)
        sf = realroots.squarefree_part_int(cand_int)
        candidates = [make_root(rep) for rep in realroots.isolate_sqfree(sf)] \
            if realroots.degree(sf) >= 1 else []
        if not candidates:
            sgn = sign_at(q, sample.extend(v, RAT_ZERO))
            return ("poly", f, [], [sgn])
        pts = self._gap_points(candidates)
        seg_signs = [sign_at(q, sample.extend(v, t)) for t in pts]
        roots = []
        pattern = [seg_signs[0]]
        for i, gamma in enumerate(candidates):
            left, right = seg_signs[i], seg_signs[i + 1]
            if left != right:
                roots.append(gamma)
                pattern.append(right)
                continue
            if sign_at(q, sample.extend(v, gamma)) == 0:
                # even-multiplicity specialization: a root without sign change
                roots.append(gamma)
                pattern.append(right)
            # otherwise a phantom candidate: the gap continues unchanged
        return ("poly", f, roots, pattern)

    # -- lifting ---------------------------------------------------------------

    def lift(self, level: int, sample: SamplePoint, signs: list) -> bool:
        cells = self.build_stack(level, sample)
        v = self.order[level - 1]
        quant = self.prefix[v.index]
        n = len(self.order)
        for cell in cells:
            for fid, s in cell.signs.items():
                signs[fid] = s
            val = _eval_tri(self.matrix, self.atom_info, signs, level)
            if val is None:
                if level >= n:
                    raise AssertionError("undecided matrix at full depth")
                val = self.lift(level + 1, sample.extend(v, cell.coord), signs)
            if quant == "forall" and val is False:
                return False
            if quant == "exists" and val is True:
                return True
        return quant == "forall"

    def _child_engine(self) -> "_Engine":
        sub = object.__new__(_Engine)
        sub.cfg = self.cfg
        sub.stats = DecisionStats()
        sub.limiter = _Limiter(self.cfg, sub.stats)
        sub.order = self.order
        sub.prefix = self.prefix
        sub.matrix = self.matrix
        sub.basis = self.basis
        sub.atom_info = self.atom_info
        sub.mccallum_failed = False
        return sub

    def lift_parallel(self, jobs: int) -> bool:
        """Deterministic data-parallel lifting over the top-level stack.

        Children are evaluated speculatively in a thread pool; results fold
        in canonical cell order with the same short-circuiting as the
        sequential loop, and only consumed children contribute to the cell
        count, so the truth value and statistics match sequential lifting.
        """
        cells = self.build_stack(1, EMPTY_SAMPLE)
        v = self.order[0]
        quant = self.prefix[v.index]
        n = len(self.order)

        def child(cell):
            sub = self._child_engine()
            signs = [0] * len(self.basis.factors)
            for fid, s in cell.signs.items():
                signs[fid] = s
            val = _eval_tri(self.matrix, self.atom_info, signs, 1)
            if val is None:
                if n == 1:
                    raise AssertionError("undecided matrix at full depth")
                val = sub.lift(2, EMPTY_SAMPLE.extend(v, cell.coord), signs)
            return val, sub.stats.cells, sub.mccallum_failed

        result = quant == "forall"
        decided = False
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            futures = [pool.submit(child, c) for c in cells]
            for fut in futures:
                if decided:
                    fut.cancel()
                    continue
                val, used, mfail = fut.result()
                self.stats.cells += used
                self.mccallum_failed |= mfail
                if self.stats.cells > self.cfg.max_cells:
                    for rest in futures:
                        rest.cancel()
                    raise ResourceLimitExceeded(
                        "cell cap %d exceeded" % self.cfg.max_cells,
                        self.stats)
                if quant == "forall" and val is False:
                    result = False
                    decided = True
                elif quant == "exists" and val is True:
                    result = True
                    decided = True
        return result


# -- public entry ----------------------------------------------------------------


def decide(f: Union[Formula, PrenexFormula],
           cfg: Optional[EngineConfig] = None):
    """Exact truth value of a closed Tarski formula, with statistics.

    Raises NotClosed for formulas with free variables and
    ResourceLimitExceeded past the configured caps.
    """
    if cfg is None:
        cfg = EngineConfig()
    cfg = cfg.with_deadline()
    t0 = time.monotonic()
    stats = DecisionStats()

    if isinstance(f, PrenexFormula):
        bound = {v for _q, v in f.prefix}
        frees = free_variables(f.matrix) - bound
        formula = f.to_formula()
    else:
        frees = free_variables(f)
        formula = f
    if frees:
        raise NotClosed("free variables: %s"
                        % ", ".join(sorted(v.name for v in frees)))
    pf = to_prenex(lower_abs(formula))
    pf = PrenexFormula(pf.prefix, simplify(pf.matrix))
    if cfg.presubstitute:
        pf = presubstitute_linear_equations(pf, cfg,
                                            record=stats.presubstituted)
    # quantifiers over variables no longer in the matrix are vacuous
    used = {v.index for v in free_variables(pf.matrix)}
    pf = PrenexFormula(tuple((q, v) for q, v in pf.prefix if v.index in used),
                       pf.matrix)

    if isinstance(pf.matrix, (TrueF, FalseF)):
        result = isinstance(pf.matrix, TrueF)
        stats.result = result
        stats.elapsed_ms = int((time.monotonic() - t0) * 1000)
        _trace_stats(cfg, stats)
        return result, stats

    order = choose_variable_order(pf, cfg.variable_order)
    run_cfg = cfg
    while True:
        engine = _Engine(pf, order, run_cfg, stats)
        try:
            engine.project()
            if run_cfg.parallel and run_cfg.jobs > 1:
                result = engine.lift_parallel(run_cfg.jobs)
            else:
                signs = [0] * len(engine.basis.factors)
                result = engine.lift(1, EMPTY_SAMPLE, signs)
        except ResourceLimitExceeded as e:
            stats.elapsed_ms = int((time.monotonic() - t0) * 1000)
            e.stats = stats
            raise
        if engine.mccallum_failed and run_cfg.projection == "mccallum":
            # well-orientedness failure: restart with the always-sound operator
            run_cfg = run_cfg.copy(projection="collins")
            presub = stats.presubstituted
            stats = DecisionStats(presubstituted=presub)
            continue
        break

    stats.result = result
    stats.elapsed_ms = int((time.monotonic() - t0) * 1000)
    _trace_stats(cfg, stats)
    return result, stats


def _trace_stats(cfg: EngineConfig, stats: DecisionStats):
    if cfg.trace:
        cfg.trace(json.dumps(stats.as_json_dict(), sort_keys=True))
