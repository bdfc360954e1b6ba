"""Problem statements: recurrence systems, initial terms, domains, goals.

The line-oriented problem file format:

    sequence P
    recurrence (n+2)*P(n+2) = (2*n+3)*x*P(n+1) - (n+1)*P(n)
    initial P(0) = 1
    initial P(1) = x
    param a                     # optional extra real parameters
    domain -1 <= x <= 1
    base 1
    lemma <quantifier-free formula>   # optional, repeatable
    goal abs(x)*P(n)^2 - P(n-1)*P(n+1) >= 0

`#` starts a comment.  The recurrence index variable is written n; any
other free identifier that is not a declared parameter is a continuous
variable like x.  Shifted sequence terms P(n+j) are carried as placeholder
variables until instantiation.  Rational coefficients such as
(n-1)/(n+1) are cleared at parse time after a decision call certifies the
denominator positive on n >= base and the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cad import EngineConfig, decide
from .errors import (FormulaSyntaxError, LeadingCoefficientVanished,
                     MissingInitialTerm, ResourceLimitExceeded,
                     UnsupportedProblem)
from .formula import (And, Atom, Forall, Formula, Implies, Rel, TRUE, TrueF,
                      free_variables)
from .parser import Parser, TermVal, tokenize
from .passes import lower_abs, simplify, to_prenex
from .polynomial import (Polynomial, VarId, lookup_variable, var_by_index,
                         variable)
from .rationals import Rat, rat, rat_sign

_PLACEHOLDER_MARK = "@"


def placeholder_var(seq: str, shift: int) -> VarId:
    return variable("%s%s%d" % (seq, _PLACEHOLDER_MARK, shift))


def placeholder_info(v: VarId):
    """(sequence name, shift) if v is a placeholder, else None."""
    if _PLACEHOLDER_MARK in v.name:
        name, _, shift = v.name.partition(_PLACEHOLDER_MARK)
        try:
            return name, int(shift)
        except ValueError:
            return None
    return None


def shifted_var(seq: str, shift: int) -> VarId:
    """Fresh real variable standing for the sequence value at n+shift."""
    suffix = "m%d" % -shift if shift < 0 else "%d" % shift
    return variable("%s_%s" % (seq, suffix))


@dataclass
class RecurrenceSystem:
    """c[order]*S(n+order) = -sum_{j<order} c[j]*S(n+j), stored
    homogeneously as coeffs[j] with sum_j coeffs[j]*S(n+j) = 0."""

    name: str
    order: int
    coeffs: list              # Polynomial per shift 0..order, in n/x/params
    n_var: VarId

    def leading(self) -> Polynomial:
        return self.coeffs[self.order]

    def instance_atom(self, n_offset: int, var_of) -> Formula:
        """The recurrence at n := n + n_offset as an equation over the
        variables produced by var_of(shift)."""
        n = self.n_var
        shift_n = Polynomial.var(n) + Polynomial.constant(n_offset)
        total = Polynomial.zero()
        for j, c in enumerate(self.coeffs):
            cj = c.substitute(n, shift_n)
            total = total + cj * Polynomial.var(var_of(j + n_offset))
        return Atom.normalized(total, Rel.EQ)


@dataclass
class ProblemStatement:
    sequences: dict                      # name -> RecurrenceSystem
    initial_terms: dict                  # (name, index) -> Polynomial
    domain: Formula                      # quantifier-free, x/params only
    base_index: int
    goal: Formula                        # template with placeholders
    lemmas: list = field(default_factory=list)
    n_var: VarId = None
    params: list = field(default_factory=list)
    continuous_vars: list = field(default_factory=list)  # x-like, incl params
    source_name: str = ""

    def goal_shifts(self) -> dict:
        """{sequence: sorted shifts} referenced by goal and lemmas."""
        out: dict = {}
        for f in [self.goal] + list(self.lemmas):
            for v in free_variables(f):
                info = placeholder_info(v)
                if info is not None:
                    out.setdefault(info[0], set()).add(info[1])
        return {k: sorted(vs) for k, vs in sorted(out.items())}

    def template_instantiate(self, f: Formula, offset: int, var_of) -> Formula:
        """Template at n := n + offset with placeholders mapped through
        var_of(sequence, shift) -> VarId."""

        def on_poly(p: Polynomial) -> Polynomial:
            for idx in sorted(p.variables()):
                v = var_by_index(idx)
                info = placeholder_info(v)
                if info is not None:
                    seq, shift = info
                    p = p.substitute(v, Polynomial.var(var_of(seq, shift + offset)))
            if offset and self.n_var is not None:
                p = p.substitute(self.n_var, Polynomial.var(self.n_var)
                                 + Polynomial.constant(offset))
            return p

        return _map_atoms(f, on_poly)

    def template_substitute_polys(self, f: Formula, n_value,
                                  seq_polys: dict) -> Formula:
        """Template at the concrete index n_value with each placeholder
        replaced by its explicit polynomial in x/params."""

        def on_poly(p: Polynomial) -> Polynomial:
            for idx in sorted(p.variables()):
                v = var_by_index(idx)
                info = placeholder_info(v)
                if info is not None:
                    seq, shift = info
                    p = p.substitute(v, seq_polys[(seq, n_value + shift)])
            if self.n_var is not None and self.n_var.index in p.variables():
                p = p.evaluate_partial({self.n_var: rat(n_value)})
            return p

        return _map_atoms(f, on_poly)


def _map_atoms(f: Formula, on_poly) -> Formula:
    from .formula import FALSE, FalseF, Not, Or, TRUE

    if isinstance(f, Atom):
        return Atom.normalized(on_poly(f.poly), f.rel)
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(_map_atoms(f.arg, on_poly))
    if isinstance(f, And):
        return And(tuple(_map_atoms(a, on_poly) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_map_atoms(a, on_poly) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_map_atoms(f.lhs, on_poly), _map_atoms(f.rhs, on_poly))
    raise TypeError("templates must be quantifier-free: %r" % (f,))


# -- problem file parsing ---------------------------------------------------


class _ProblemParser:
    def __init__(self, text: str, name: str = "",
                 clear_cfg: Optional[EngineConfig] = None):
        self.text = text
        self.name = name
        self.clear_cfg = clear_cfg or EngineConfig(max_cells=50_000,
                                                   timeout=30.0)
        self.sequences: dict = {}
        self.seq_names: list = []
        self.initial_terms: dict = {}
        self.params: list = []
        self.domain_parts: list = []
        self.base_index: Optional[int] = None
        self.goal: Optional[Formula] = None
        self.lemmas: list = []
        self.n_var = variable("n")
        self.pending_atoms: list = []   # (num, den, rel, line no, kind)
        self.recurrence_lines: list = []

    # hooks -----------------------------------------------------------------

    def _apply_hook(self, fname: str, arg: TermVal, pos: int):
        if fname not in self.seq_names:
            raise UnsupportedProblem(
                "unknown function %r; only declared sequences and abs() "
                "may be applied" % fname)
        if not arg.den.is_constant():
            raise UnsupportedProblem(
                "sequence index of %s must be n plus an integer" % fname)
        p = arg.num.scale(1 / arg.den.constant_value())
        shift = self._shift_of(p, fname)
        return Polynomial.var(placeholder_var(fname, shift))

    def _shift_of(self, p: Polynomial, seq: str) -> int:
        n = self.n_var
        if p.variables() - {n.index}:
            raise UnsupportedProblem(
                "sequence index of %s must be n plus an integer" % seq)
        d = p.degree(n)
        if d > 1:
            raise UnsupportedProblem(
                "sequence index of %s must be n plus an integer, found a "
                "nonlinear index" % seq)
        coeffs = p.coefficients(n)
        if d == 1 and coeffs[1].constant_value() != 1:
            raise UnsupportedProblem(
                "sequence index of %s must have unit coefficient on n" % seq)
        if d < 1:
            raise UnsupportedProblem(
                "sequence term %s(%s) has a fixed index; only shifts of n "
                "are allowed outside initial lines" % (seq, p.to_text()))
        c = coeffs[0].constant_value()
        if c.denominator != 1:
            raise UnsupportedProblem("sequence shift of %s must be an integer"
                                     % seq)
        return int(c)

    # line handlers -----------------------------------------------------------

    def parse(self) -> ProblemStatement:
        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            word, _, rest = line.partition(" ")
            rest = rest.strip()
            try:
                handler = getattr(self, "_on_" + word, None)
                if handler is None:
                    raise UnsupportedProblem("unknown directive %r" % word)
                handler(rest)
            except FormulaSyntaxError as e:
                raise FormulaSyntaxError(
                    "line %d: %s" % (lineno, e.args[0]), e.position) from None
            except UnsupportedProblem as e:
                raise UnsupportedProblem("line %d: %s" % (lineno, e)) from None
        return self._finish()

    def _on_sequence(self, rest: str):
        name = rest.strip()
        if not name.isidentifier():
            raise UnsupportedProblem("bad sequence name %r" % name)
        if name in self.seq_names:
            raise UnsupportedProblem("sequence %s declared twice" % name)
        self.seq_names.append(name)

    def _on_param(self, rest: str):
        name = rest.strip()
        if not name.isidentifier():
            raise UnsupportedProblem("bad parameter name %r" % name)
        self.params.append(variable(name))

    def _on_base(self, rest: str):
        self.base_index = int(rest.strip())

    def _on_recurrence(self, rest: str):
        self._reject_full_history(rest)
        self.recurrence_lines.append(rest)

    def _reject_full_history(self, rest: str):
        toks = tokenize(rest)
        for i, t in enumerate(toks):
            if t.kind == "ident" and t.text in ("sum", "Sum", "product") \
                    and i + 1 < len(toks) and toks[i + 1].text == "(":
                seqs = ", ".join(self.seq_names) or "the sequence"
                raise UnsupportedProblem(
                    "recurrence for %s has unbounded order: it sums over "
                    "all previous terms, but the input class requires the "
                    "n-th value to depend on a fixed number of previous "
                    "values" % seqs)

    def _parse_equation(self, text: str):
        """(lhs - rhs) as a deferred (num, den) pair plus the relation."""
        collected = []

        def atom_hook(num, den, rel):
            collected.append((num, den, rel))
            return TRUE

        p = Parser(text, allow_any_free=True, apply_hook=self._apply_hook,
                   atom_hook=atom_hook)
        f = p.parse_formula()
        if len(collected) != 1 or not isinstance(f, TrueF):
            raise UnsupportedProblem("expected a single equation")
        return collected[0]

    def _on_initial(self, rest: str):
        toks = tokenize(rest)
        if len(toks) < 5 or toks[0].kind != "ident" or toks[1].text != "(":
            raise UnsupportedProblem("initial lines look like: initial P(0) = <poly>")
        seq = toks[0].text
        if seq not in self.seq_names:
            raise UnsupportedProblem("initial term for undeclared sequence %r" % seq)
        close = rest.index(")")
        idx_text = rest[rest.index("(") + 1:close]
        index = int(idx_text.strip())
        eq = rest[close + 1:].strip()
        if not eq.startswith("="):
            raise UnsupportedProblem("initial lines look like: initial P(0) = <poly>")
        body = eq[1:].strip()
        p = Parser(body, allow_any_free=True)
        val = p._term()
        if p.peek().kind != "end":
            raise FormulaSyntaxError("unexpected trailing input", p.peek().pos)
        if not val.den.is_constant():
            raise UnsupportedProblem("initial terms must be polynomials")
        poly = val.num.scale(1 / val.den.constant_value())
        if self.n_var.index in poly.variables():
            raise UnsupportedProblem("initial terms may not involve n")
        self.initial_terms[(seq, index)] = poly

    def _on_domain(self, rest: str):
        p = Parser(rest, allow_any_free=True)
        f = p.parse_formula()
        if free_variables(f) & {self.n_var}:
            raise UnsupportedProblem("the domain constrains x and parameters, not n")
        self.domain_parts.append(f)

    def _on_lemma(self, rest: str):
        self.lemmas.append(self._parse_template(rest, "lemma"))

    def _on_goal(self, rest: str):
        if self.goal is not None:
            raise UnsupportedProblem("only one goal per problem")
        self.goal = self._parse_template(rest, "goal")

    def _parse_template(self, text: str, kind: str) -> Formula:
        def atom_hook(num, den, rel):
            if den.is_constant():
                return Atom.make(num.scale(1 / den.constant_value()), rel)
            marker = Atom.normalized(
                Polynomial.var(variable("@deferred%d" % len(self.pending_atoms))),
                Rel.EQ)
            self.pending_atoms.append((num, den, rel, marker, kind))
            return marker

        p = Parser(text, allow_any_free=True, apply_hook=self._apply_hook,
                   atom_hook=atom_hook)
        return p.parse_formula()

    # finishing -----------------------------------------------------------------

    def _finish(self) -> ProblemStatement:
        if not self.seq_names:
            raise UnsupportedProblem("no sequence declared")
        if self.goal is None:
            raise UnsupportedProblem("no goal declared")
        if self.base_index is None:
            self.base_index = 0
        domain = simplify(And.of(*self.domain_parts)) if self.domain_parts else TRUE
        # identify the continuous variables (everything free except n,
        # parameters and placeholders)
        cont = set(self.params)
        for f in [self.goal, domain] + self.lemmas:
            for v in free_variables(f):
                if v == self.n_var or placeholder_info(v) is not None:
                    continue
                if not v.name.startswith("@"):
                    cont.add(v)
        # recurrences (parsed late so sequence/param sets are complete)
        sequences = {}
        for text in self.recurrence_lines:
            rec = self._build_recurrence(text, domain)
            if rec.name in sequences:
                raise UnsupportedProblem("two recurrences for sequence %s"
                                         % rec.name)
            sequences[rec.name] = rec
            for v0 in rec.coeffs:
                for idx in v0.variables():
                    v = var_by_index(idx)
                    if v != self.n_var and placeholder_info(v) is None:
                        cont.add(v)
        for name in self.seq_names:
            if name not in sequences:
                raise UnsupportedProblem("sequence %s has no recurrence" % name)
        for (seq, _i), poly in self.initial_terms.items():
            for idx in poly.variables():
                cont.add(var_by_index(idx))
        continuous = sorted(cont, key=lambda v: v.index)
        ps = ProblemStatement(
            sequences=sequences,
            initial_terms=dict(self.initial_terms),
            domain=domain,
            base_index=self.base_index,
            goal=self.goal,
            lemmas=list(self.lemmas),
            n_var=self.n_var,
            params=list(self.params),
            continuous_vars=continuous,
            source_name=self.name,
        )
        self._clear_denominators(ps)
        _validate(ps)
        return ps

    def _build_recurrence(self, text: str, domain: Formula) -> RecurrenceSystem:
        num, den, rel = self._parse_equation(text)
        if rel != "=":
            raise UnsupportedProblem("a recurrence must be an equation")
        if not den.is_constant():
            self._check_denominator_positive(den, domain)
        # collect placeholder coefficients from num
        seqs = set()
        shifts = {}
        base = Polynomial.zero()
        for m, c in num.terms.items():
            ph = None
            rest = []
            for idx, e in m:
                info = placeholder_info(var_by_index(idx))
                if info is not None:
                    if ph is not None or e > 1:
                        raise UnsupportedProblem(
                            "recurrence must be linear in the sequence terms")
                    ph = info
                else:
                    rest.append((idx, e))
            if ph is None:
                base = base + Polynomial({m: c})
            else:
                seqs.add(ph[0])
                shifts.setdefault(ph[1], Polynomial.zero())
                shifts[ph[1]] = shifts[ph[1]] + Polynomial({tuple(rest): c})
        if not base.is_zero():
            raise UnsupportedProblem(
                "recurrence must be homogeneous in the sequence terms")
        if len(seqs) != 1:
            raise UnsupportedProblem(
                "a recurrence must involve exactly one sequence")
        seq = seqs.pop()
        lo = min(shifts)
        hi = max(shifts)
        order = hi - lo
        if order < 1:
            raise UnsupportedProblem("recurrence order must be at least 1")
        n = self.n_var
        coeffs = []
        for j in range(lo, hi + 1):
            c = shifts.get(j, Polynomial.zero())
            if lo != 0:
                c = c.substitute(n, Polynomial.var(n) - Polynomial.constant(lo))
            coeffs.append(c)
        if coeffs[-1].is_zero():
            raise UnsupportedProblem("leading recurrence coefficient is zero")
        return RecurrenceSystem(name=seq, order=order, coeffs=coeffs, n_var=n)

    def _check_denominator_positive(self, den: Polynomial, domain: Formula):
        for idx in den.variables():
            if placeholder_info(var_by_index(idx)) is not None:
                raise UnsupportedProblem(
                    "denominators may not contain sequence terms")
        base = self.base_index if self.base_index is not None else 0
        n = self.n_var
        hyp = And.of(Atom.normalized(
            Polynomial.var(n) - Polynomial.constant(base), Rel.GE), domain)
        body = Implies(hyp, Atom.normalized(den, Rel.GT))
        quantified = body
        for v in sorted(free_variables(body), key=lambda v: -v.index):
            quantified = Forall(v, quantified)
        try:
            ok, _stats = decide(quantified, self.clear_cfg)
        except ResourceLimitExceeded:
            ok = False
        if not ok:
            raise UnsupportedProblem(
                "cannot clear the denominator %s: not provably positive for "
                "n >= %d on the domain" % (den.to_text(), base))

    def _clear_denominators(self, ps: ProblemStatement):
        """Replace deferred quotient atoms inside goal/lemmas."""
        replacements = {}
        for num, den, rel, marker, _kind in self.pending_atoms:
            self._check_denominator_positive(den, ps.domain)
            replacements[marker] = Atom.make(num, rel)
        if not replacements:
            return

        def sub(f: Formula) -> Formula:
            if f in replacements:
                return replacements[f]
            if isinstance(f, And):
                return And(tuple(sub(a) for a in f.args))
            from .formula import Not, Or
            if isinstance(f, Or):
                return Or(tuple(sub(a) for a in f.args))
            if isinstance(f, Not):
                return Not(sub(f.arg))
            if isinstance(f, Implies):
                return Implies(sub(f.lhs), sub(f.rhs))
            return f

        ps.goal = sub(ps.goal)
        ps.lemmas = [sub(l) for l in ps.lemmas]


def _validate(ps: ProblemStatement):
    shifts = ps.goal_shifts()
    if not shifts:
        raise UnsupportedProblem("the goal references no sequence term")
    for seq, js in shifts.items():
        if seq not in ps.sequences:
            raise UnsupportedProblem("goal references undeclared sequence %s"
                                     % seq)
        if ps.base_index + js[0] < 0:
            raise UnsupportedProblem(
                "goal at the base index n=%d would reference %s(%d)"
                % (ps.base_index, seq, ps.base_index + js[0]))


def parse_problem(text: str, name: str = "",
                  clear_cfg: Optional[EngineConfig] = None) -> ProblemStatement:
    return _ProblemParser(text, name=name, clear_cfg=clear_cfg).parse()


# -- sequence evaluation -----------------------------------------------------


def sequence_values(ps: ProblemStatement, n_max: int, assignment: dict,
                    sequence: Optional[str] = None) -> list:
    """Exact values S(0..n_max) under a rational assignment of x and params.

    With several sequences, `sequence` picks one (default: the only one).
    """
    if sequence is None:
        if len(ps.sequences) != 1:
            raise ValueError("several sequences; pick one")
        sequence = next(iter(ps.sequences))
    rec = ps.sequences[sequence]
    assign = {v: rat(q) for v, q in assignment.items()}
    values: list = []
    r = rec.order
    for k in range(n_max + 1):
        if (sequence, k) in ps.initial_terms:
            values.append(ps.initial_terms[(sequence, k)].evaluate(assign))
            continue
        if k < r:
            raise MissingInitialTerm(
                "%s(%d) is needed but not provided" % (sequence, k))
        n_at = k - r
        full = dict(assign)
        full[rec.n_var] = rat(n_at)
        lead = rec.coeffs[r].evaluate(full)
        if lead == 0:
            raise LeadingCoefficientVanished(
                "leading coefficient of the %s recurrence vanishes at n=%d"
                % (sequence, n_at), n_at)
        total = rat(0)
        for j in range(r):
            cj = rec.coeffs[j].evaluate(full)
            if cj != 0:
                total += cj * values[n_at + j]
        values.append(-total / lead)
    return values


def symbolic_sequence_polys(ps: ProblemStatement, sequence: str,
                            upto: int) -> dict:
    """{(sequence, k): Polynomial in x/params} for k = 0..upto, by exact
    symbolic unrolling of the recurrence."""
    from .polytools import try_exact_div
    rec = ps.sequences[sequence]
    out = {}
    r = rec.order
    for k in range(upto + 1):
        if (sequence, k) in ps.initial_terms:
            out[(sequence, k)] = ps.initial_terms[(sequence, k)]
            continue
        if k < r:
            raise MissingInitialTerm(
                "%s(%d) is needed but not provided" % (sequence, k))
        n_at = k - r
        nval = {rec.n_var: rat(n_at)}
        lead = rec.coeffs[r].evaluate_partial(nval)
        if lead.is_zero():
            raise LeadingCoefficientVanished(
                "leading coefficient of the %s recurrence vanishes at n=%d"
                % (sequence, n_at), n_at)
        total = Polynomial.zero()
        for j in range(r):
            cj = rec.coeffs[j].evaluate_partial(nval)
            total = total + cj * out[(sequence, n_at + j)]
        total = -total
        if lead.is_constant():
            out[(sequence, k)] = total.scale(1 / lead.constant_value())
            continue
        q = try_exact_div(total, lead)
        if q is None:
            raise UnsupportedProblem(
                "cannot unroll %s(%d) symbolically: the leading coefficient "
                "%s does not divide the combination exactly"
                % (sequence, k, lead.to_text()))
        out[(sequence, k)] = q
    return out
