"""Normalization passes on Tarski formulas: negation normal form, boolean
simplification, absolute-value lowering and prenexing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NestedAbsTooDeep
from .formula import (FALSE, TRUE, And, Atom, Exists, FalseF, Forall, Formula,
                      Implies, Not, Or, Rel, TrueF, abs_argument, abs_depth,
                      canonical_key, free_variables, poly_abs_vars)
from .polynomial import Polynomial, VarId, variable


@dataclass(frozen=True)
class PrenexFormula:
    """Quantifier prefix (outermost first) over a quantifier-free matrix."""

    prefix: tuple  # tuple[(quantifier: str 'forall'|'exists', VarId), ...]
    matrix: Formula

    def to_formula(self) -> Formula:
        f = self.matrix
        for q, v in reversed(self.prefix):
            f = Forall(v, f) if q == "forall" else Exists(v, f)
        return f


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form; implications compiled away, negations pushed
    into atoms by flipping relations."""
    if isinstance(f, Atom):
        return f.negate() if negate else f
    if isinstance(f, TrueF):
        return FALSE if negate else TRUE
    if isinstance(f, FalseF):
        return TRUE if negate else FALSE
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, And):
        parts = tuple(nnf(a, negate) for a in f.args)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(a, negate) for a in f.args)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Implies):
        if negate:
            return And((nnf(f.lhs, False), nnf(f.rhs, True)))
        return Or((nnf(f.lhs, True), nnf(f.rhs, False)))
    if isinstance(f, Forall):
        body = nnf(f.body, negate)
        return Exists(f.var, body) if negate else Forall(f.var, body)
    if isinstance(f, Exists):
        body = nnf(f.body, negate)
        return Forall(f.var, body) if negate else Exists(f.var, body)
    raise TypeError("not a formula: %r" % (f,))


def _complement_literal(f: Formula) -> Optional[Formula]:
    if isinstance(f, Atom):
        return f.negate()
    return None


def simplify(f: Formula) -> Formula:
    """Sound boolean simplification on an NNF formula.

    Flattens and sorts n-ary connectives, removes duplicates and constants,
    detects complementary literals, and prunes conjunct members that are
    complements of a disjunction sibling (and dually), which collapses
    tautologies like ``m <-> m`` without touching the atoms.
    """

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Atom, TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            inner = walk(g.arg)
            if isinstance(inner, Atom):
                return inner.negate()
            if isinstance(inner, TrueF):
                return FALSE
            if isinstance(inner, FalseF):
                return TRUE
            return Not(inner)
        if isinstance(g, Implies):
            return walk(Or.of(nnf(g.lhs, True), g.rhs))
        if isinstance(g, (Forall, Exists)):
            body = walk(g.body)
            if isinstance(body, (TrueF, FalseF)):
                return body
            return type(g)(g.var, body)
        if isinstance(g, (And, Or)):
            is_and = isinstance(g, And)
            absorb = FALSE if is_and else TRUE
            neutral = TRUE if is_and else FALSE
            args = []
            for a in g.args:
                a = walk(a)
                if isinstance(a, type(g)):
                    args.extend(a.args)
                else:
                    args.append(a)
            # constants
            if any(a == absorb for a in args):
                return absorb
            args = [a for a in args if a != neutral]
            # dedup, canonical order
            seen = {}
            for a in args:
                seen.setdefault(canonical_key(a), a)
            args = [seen[k] for k in sorted(seen)]
            # complementary literal pair
            lits = {canonical_key(a) for a in args if isinstance(a, Atom)}
            for a in args:
                c = _complement_literal(a)
                if c is not None and canonical_key(c) in lits:
                    return absorb
            # context pruning: inside Or(...), a conjunct member that is the
            # complement of a sibling literal is redundant (and dually)
            changed = False
            dual = And if not is_and else Or
            comp_lits = set()
            for a in args:
                c = _complement_literal(a)
                if c is not None:
                    comp_lits.add(canonical_key(c))
            if comp_lits:
                new_args = []
                for a in args:
                    if isinstance(a, dual):
                        kept = tuple(x for x in a.args
                                     if canonical_key(x) not in comp_lits)
                        if len(kept) != len(a.args):
                            changed = True
                            a = walk(dual(kept))
                    new_args.append(a)
                args = new_args
            if changed:
                return walk(And.of(*args) if is_and else Or.of(*args))
            if not args:
                return neutral
            if len(args) == 1:
                return args[0]
            return (And if is_and else Or)(tuple(args))
        raise TypeError("not a formula: %r" % (g,))

    return walk(f)


def lower_abs(f: Formula, max_depth: int = 16) -> Formula:
    """Eliminate abs() by case splitting, applied at the atoms.

    Each atom containing abs variables is replaced by the two-branch split
    on the sign of a maximal (outermost) abs argument e:
    ``(e >= 0 and atom[abs(e):=e]) or (e <= 0 and atom[abs(e):=-e])``,
    recursively until abs-free.  Raises NestedAbsTooDeep past max_depth.
    """

    def split_atom(atom: Atom, budget: int) -> Formula:
        indices = poly_abs_vars(atom.poly)
        if not indices:
            return atom
        if budget <= 0:
            raise NestedAbsTooDeep("abs nesting exceeds the configured bound")
        target = max(indices, key=abs_depth)
        from .polynomial import var_by_index
        v = var_by_index(target)
        e = abs_argument(target)
        pos = Atom.normalized(atom.poly.substitute(v, e), atom.rel)
        neg = Atom.normalized(atom.poly.substitute(v, -e), atom.rel)
        pos_guard = Atom.normalized(e, Rel.GE)
        neg_guard = Atom.normalized(-e, Rel.GE)
        pos_f = pos if isinstance(pos, (TrueF, FalseF)) else split_atom(pos, budget - 1)
        neg_f = neg if isinstance(neg, (TrueF, FalseF)) else split_atom(neg, budget - 1)
        pos_guard_f = pos_guard if isinstance(pos_guard, (TrueF, FalseF)) \
            else split_atom(pos_guard, budget - 1)
        neg_guard_f = neg_guard if isinstance(neg_guard, (TrueF, FalseF)) \
            else split_atom(neg_guard, budget - 1)
        return Or.of(And.of(pos_guard_f, pos_f), And.of(neg_guard_f, neg_f))

    def walk(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return split_atom(g, max_depth)
        if isinstance(g, (TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.arg))
        if isinstance(g, And):
            return And(tuple(walk(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(walk(g.lhs), walk(g.rhs))
        if isinstance(g, (Forall, Exists)):
            return type(g)(g.var, walk(g.body))
        raise TypeError("not a formula: %r" % (g,))

    return walk(f)


def to_prenex(f: Formula) -> PrenexFormula:
    """Classical prenexing: NNF, then quantifiers hoisted left to right with
    capture-avoiding renaming.  The matrix is quantifier-free NNF."""
    f = nnf(f)

    fresh_counter = [0]

    def fresh_like(v: VarId) -> VarId:
        while True:
            fresh_counter[0] += 1
            cand = "%s_%d" % (v.name, fresh_counter[0])
            from .polynomial import lookup_variable
            if lookup_variable(cand) is None:
                return variable(cand)

    def rename(g: Formula, old: VarId, new: VarId) -> Formula:
        xnew = Polynomial.var(new)
        if isinstance(g, Atom):
            return Atom.normalized(g.poly.substitute(old, xnew), g.rel)
        if isinstance(g, (TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            return Not(rename(g.arg, old, new))
        if isinstance(g, And):
            return And(tuple(rename(a, old, new) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(rename(a, old, new) for a in g.args))
        if isinstance(g, (Forall, Exists)):
            if g.var == old:
                return g
            return type(g)(g.var, rename(g.body, old, new))
        raise TypeError("unexpected node in NNF: %r" % (g,))

    def pull(g: Formula, taken: set) -> tuple:
        """returns (prefix list, matrix); taken = variable indices in use."""
        if isinstance(g, (Atom, TrueF, FalseF)):
            return [], g
        if isinstance(g, (Forall, Exists)):
            v = g.var
            body = g.body
            if v.index in taken:
                nv = fresh_like(v)
                body = rename(body, v, nv)
                v = nv
            taken.add(v.index)
            prefix, matrix = pull(body, taken)
            kind = "forall" if isinstance(g, Forall) else "exists"
            return [(kind, v)] + prefix, matrix
        if isinstance(g, (And, Or)):
            prefix = []
            matrices = []
            for a in g.args:
                p, m = pull(a, taken)
                prefix.extend(p)
                matrices.append(m)
            return prefix, type(g)(tuple(matrices))
        if isinstance(g, Not):
            # NNF leaves Not only above atoms
            return [], simplify(g)
        raise TypeError("unexpected node in NNF: %r" % (g,))

    taken = {v.index for v in free_variables(f)}
    prefix, matrix = pull(f, taken)
    return PrenexFormula(tuple(prefix), simplify(matrix))
