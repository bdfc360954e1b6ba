"""The inductive proving pipeline: numeric falsification, base-case and
induction-step formula generation, decisions, and the proof report.

Statuses:

  Proved                  base cases and induction step all decided true
  DisprovedNumeric        exact rational counterexample found
  BaseCaseFailed          some base-case formula decided false
  InductionStepUndecided  the step formula is false; explicitly NOT a
                          refutation (the sufficient condition can fail
                          even when the conjecture is true)
  ResourceLimit           cell cap or timeout exceeded
  Unsupported             input outside the recurrence class
"""

from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .cad import DecisionStats, EngineConfig, decide
from .errors import (IndeqError, LeadingCoefficientVanished,
                     MissingInitialTerm, ResourceLimitExceeded,
                     UnsupportedProblem)
from .formula import (And, Atom, FALSE, FalseF, Forall, Formula, Implies,
                      Not, Or, Rel, TRUE, TrueF, evaluate, free_variables,
                      to_text)
from .passes import lower_abs, simplify, to_prenex
from .polynomial import Polynomial, VarId, var_by_index
from .problem import (ProblemStatement, placeholder_info, sequence_values,
                      shifted_var, symbolic_sequence_polys)
from .rationals import Rat, rat, rat_str

STATUS_PROVED = "Proved"
STATUS_DISPROVED = "DisprovedNumeric"
STATUS_BASE_FAILED = "BaseCaseFailed"
STATUS_STEP_UNDECIDED = "InductionStepUndecided"
STATUS_RESOURCE = "ResourceLimit"
STATUS_UNSUPPORTED = "Unsupported"


@dataclass
class FalsifierConfig:
    n_max: int = 50
    samples_per_variable: int = 64
    max_total_samples: int = 4096
    seed: int = 987654321
    jobs: int = 1


@dataclass
class Counterexample:
    n: int
    assignment: dict            # VarId -> Rat
    witnessed_values: list      # exact sequence values S(0..) per sequence
    violated_atom: str

    def as_json_dict(self) -> dict:
        return {
            "n": self.n,
            "assignment": {v.name: rat_str(q) for v, q in self.assignment.items()},
            "witnessed_values": {seq: [rat_str(q) for q in vals]
                                 for seq, vals in self.witnessed_values},
            "violated_atom": self.violated_atom,
        }


@dataclass
class PhaseOutcome:
    formula_text: str
    decided: Optional[bool]
    stats: Optional[DecisionStats]
    note: str = ""

    def as_json_dict(self) -> dict:
        return {
            "formula": self.formula_text,
            "decided": self.decided,
            "stats": self.stats.as_json_dict() if self.stats else None,
            "note": self.note,
        }


@dataclass
class ProofReport:
    status: str
    falsification: dict = field(default_factory=dict)
    base_cases: list = field(default_factory=list)     # [PhaseOutcome]
    induction_step: Optional[PhaseOutcome] = None
    counterexample: Optional[Counterexample] = None
    message: str = ""

    def aggregate_stats(self) -> dict:
        cells = 0
        elapsed = 0
        factors = []
        for ph in self.base_cases + ([self.induction_step] if self.induction_step else []):
            if ph and ph.stats:
                cells += ph.stats.cells
                elapsed += ph.stats.elapsed_ms
                factors = ph.stats.factors_per_level or factors
        return {"cells": cells, "factors_per_level": factors,
                "elapsed_ms": elapsed, "result": self.status}

    def as_json_dict(self) -> dict:
        return {
            "status": self.status,
            "falsification": self.falsification,
            "base_cases": [b.as_json_dict() for b in self.base_cases],
            "induction_step": (self.induction_step.as_json_dict()
                               if self.induction_step else None),
            "stats": self.aggregate_stats(),
            "counterexample": (self.counterexample.as_json_dict()
                               if self.counterexample else None),
            "message": self.message,
        }

    def to_json(self, strip_timing: bool = False) -> str:
        d = self.as_json_dict()
        if strip_timing:
            _strip_timing(d)
        return json.dumps(d, indent=2, sort_keys=True)


def _strip_timing(d):
    if isinstance(d, dict):
        for k in list(d):
            if k == "elapsed_ms":
                d[k] = 0
            else:
                _strip_timing(d[k])
    elif isinstance(d, list):
        for item in d:
            _strip_timing(item)


def report_from_json(text: str) -> ProofReport:
    """Inverse of ProofReport.to_json for machine consumers."""
    d = json.loads(text)

    def phase(pd):
        if pd is None:
            return None
        stats = None
        if pd.get("stats"):
            sd = pd["stats"]
            stats = DecisionStats(
                cells=sd["cells"], factors_per_level=sd["factors_per_level"],
                elapsed_ms=sd["elapsed_ms"], result=sd["result"],
                peak_bytes_estimate=sd["peak_bytes_estimate"],
                presubstituted=sd["presubstituted"])
        return PhaseOutcome(pd["formula"], pd["decided"], stats,
                            pd.get("note", ""))

    ce = None
    if d.get("counterexample"):
        cd = d["counterexample"]
        from .polynomial import variable
        ce = Counterexample(
            n=cd["n"],
            assignment={variable(name): rat(val)
                        for name, val in cd["assignment"].items()},
            witnessed_values=[(seq, [rat(v) for v in vals])
                              for seq, vals in cd["witnessed_values"].items()],
            violated_atom=cd["violated_atom"])
    return ProofReport(
        status=d["status"],
        falsification=d.get("falsification", {}),
        base_cases=[phase(b) for b in d.get("base_cases", [])],
        induction_step=phase(d.get("induction_step")),
        counterexample=ce,
        message=d.get("message", ""))


# -- numeric falsification -----------------------------------------------------


def _box_from_domain(domain: Formula, variables: list) -> dict:
    """Per-variable closed sampling box implied by simple linear atoms."""
    bounds = {v.index: [rat(-10), rat(10)] for v in variables}

    def visit(f: Formula):
        if isinstance(f, And):
            for a in f.args:
                visit(a)
            return
        if not isinstance(f, Atom):
            return
        vs = list(f.poly.variables())
        if len(vs) != 1 or f.rel not in (Rel.GE, Rel.GT):
            return
        v = var_by_index(vs[0])
        if f.poly.degree(v) != 1:
            return
        coeffs = f.poly.coefficients(v)
        a = coeffs[1].constant_value()
        b = coeffs[0].constant_value()
        x0 = -b / a
        if vs[0] not in bounds:
            return
        if a > 0:
            bounds[vs[0]][0] = max(bounds[vs[0]][0], x0)
        else:
            bounds[vs[0]][1] = min(bounds[vs[0]][1], x0)

    visit(domain)
    return {idx: (lo, hi if hi > lo else lo + 1) for idx, (lo, hi) in bounds.items()}


def falsify_numeric(ps: ProblemStatement,
                    cfg: Optional[FalsifierConfig] = None,
                    deadline_probe=None):
    """Search a deterministic rational sample set for an exact violation.

    Returns (counterexample or None, summary dict).  Sampling is a
    low-discrepancy grid over the domain box plus fixed-seed rational
    perturbations, rejection-tested against the domain formula; with
    several workers the lowest sample index still wins.
    """
    if cfg is None:
        cfg = FalsifierConfig()
    variables = ps.continuous_vars
    box = _box_from_domain(ps.domain, variables)
    per_var = cfg.samples_per_variable
    if variables:
        while per_var > 1 and per_var ** len(variables) > cfg.max_total_samples:
            per_var -= 1
    rng = random.Random(cfg.seed)
    grids = {}
    for v in variables:
        lo, hi = box[v.index]
        width = hi - lo
        pts = [lo + width * Rat(2 * i + 1, 2 * per_var) for i in range(per_var)]
        jitter = [lo + width * Rat(rng.randrange(1, 997), 997)
                  for _ in range(max(2, per_var // 8))]
        grids[v.index] = pts + jitter
    if variables:
        combos = list(itertools.product(*(grids[v.index] for v in variables)))
    else:
        combos = [()]
    samples = [dict(zip(variables, combo)) for combo in combos]
    tested = [0]

    def check_sample(item):
        index, assignment = item
        if deadline_probe is not None:
            deadline_probe()
        if not isinstance(ps.domain, TrueF) and not evaluate(ps.domain, assignment):
            return None
        tested[0] += 1
        values = {}
        try:
            for seq in ps.sequences:
                values[seq] = sequence_values(
                    ps, cfg.n_max + max(s for ss in ps.goal_shifts().values()
                                        for s in ss),
                    assignment, sequence=seq)
        except (MissingInitialTerm, LeadingCoefficientVanished) as e:
            raise UnsupportedProblem(str(e)) from None
        shifts = ps.goal_shifts()
        min_shift = min(s for ss in shifts.values() for s in ss)
        for n in range(max(ps.base_index, -min_shift), cfg.n_max + 1):
            point = dict(assignment)
            point[ps.n_var] = rat(n)
            for seq, ss in shifts.items():
                for s in ss:
                    from .problem import placeholder_var
                    point[placeholder_var(seq, s)] = values[seq][n + s]
            if not evaluate(ps.goal, point):
                atom = _first_violated_atom(ps.goal, point)
                return index, Counterexample(
                    n=n, assignment=dict(assignment),
                    witnessed_values=[(seq, values[seq]) for seq in values],
                    violated_atom=atom)
        return None

    hits = []
    items = list(enumerate(samples))
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            for res in pool.map(check_sample, items):
                if res is not None:
                    hits.append(res)
    else:
        for item in items:
            res = check_sample(item)
            if res is not None:
                hits.append(res)
                break
    summary = {"samples_tested": tested[0], "n_max": cfg.n_max,
               "found": bool(hits)}
    if hits:
        hits.sort(key=lambda t: t[0])
        return hits[0][1], summary
    return None, summary


def _first_violated_atom(goal: Formula, point: dict) -> str:
    out = []

    def walk(f):
        if isinstance(f, Atom):
            if not evaluate(f, point):
                out.append(to_text(f))
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, Implies):
            walk(f.lhs)
            walk(f.rhs)

    walk(goal)
    return out[0] if out else to_text(goal)


# -- formula generation ---------------------------------------------------------


def build_induction_step(ps: ProblemStatement,
                         include_domain: bool = True,
                         include_recurrences: bool = True,
                         include_n_bound: bool = True) -> Formula:
    """The closed Tarski formula whose truth gives the induction step.

    Universally quantified over n, the continuous variables and fresh real
    variables standing for the shifted sequence terms; the hypotheses are
    the index bound, the domain, one recurrence instance for every fresh
    variable the recurrences can express, the lemma instances, and the
    goal at n; the conclusion is the goal at n+1.  abs() is lowered and
    the result is prenexed.
    """
    shifts = ps.goal_shifts()
    windows = {}
    for seq, ss in shifts.items():
        rec = ps.sequences.get(seq)
        if rec is None:
            raise UnsupportedProblem("no recurrence for sequence %s" % seq)
        windows[seq] = (min(ss), max(ss) + 1)

    def var_of(seq, shift):
        lo, hi = windows[seq]
        if shift < lo or shift > hi:
            raise UnsupportedProblem(
                "shift %s(n%+d) falls outside the induction window" % (seq, shift))
        return shifted_var(seq, shift)

    hyps = []
    if include_n_bound:
        hyps.append(Atom.normalized(
            Polynomial.var(ps.n_var) - Polynomial.constant(ps.base_index),
            Rel.GE))
    if include_domain and not isinstance(ps.domain, TrueF):
        hyps.append(ps.domain)
    if include_recurrences:
        for seq, (lo, hi) in windows.items():
            rec = ps.sequences[seq]
            for j in range(lo + rec.order, hi + 1):
                n_offset = j - rec.order
                hyps.append(rec.instance_atom(
                    n_offset, lambda s, _seq=seq: var_of(_seq, s)))
    for lemma in ps.lemmas:
        lshifts = [s for v in free_variables(lemma)
                   for s in [placeholder_info(v)] if s is not None]
        if lshifts:
            ls = [s for _seq, s in lshifts]
            lo_l, hi_l = min(ls), max(ls)
        else:
            lo_l, hi_l = 0, 0
        for offset in range(0, 2):
            fits = all(lo_l + offset >= windows[seq][0]
                       and hi_l + offset <= windows[seq][1]
                       for seq, _s in lshifts) if lshifts else offset == 0
            if fits:
                hyps.append(ps.template_instantiate(lemma, offset, var_of))
    hyps.append(ps.template_instantiate(ps.goal, 0, var_of))
    conclusion = ps.template_instantiate(ps.goal, 1, var_of)
    body = Implies(And.of(*hyps), conclusion)
    frees = sorted(free_variables(body), key=lambda v: v.index)
    f = body
    for v in reversed(frees):
        f = Forall(v, f)
    return to_prenex(lower_abs(f)).to_formula()


def build_base_cases(ps: ProblemStatement) -> list:
    """Closed formulas for the induction base: the goal at the base index
    with every shifted term replaced by its explicit polynomial,
    universally quantified over the domain."""
    shifts = ps.goal_shifts()
    n0 = ps.base_index
    seq_polys = {}
    for seq, ss in shifts.items():
        hi = n0 + max(ss)
        lo = n0 + min(ss)
        if lo < 0:
            raise UnsupportedProblem(
                "base case at n=%d references %s(%d)" % (n0, seq, lo))
        seq_polys.update(symbolic_sequence_polys(ps, seq, hi))
    goal0 = ps.template_substitute_polys(ps.goal, n0, seq_polys)
    if isinstance(ps.domain, TrueF):
        body = goal0
    else:
        body = Implies(ps.domain, goal0)
    frees = sorted(free_variables(body), key=lambda v: v.index)
    f = body
    for v in reversed(frees):
        f = Forall(v, f)
    return [to_prenex(lower_abs(f)).to_formula()]


# -- the pipeline ----------------------------------------------------------------


def prove(ps: ProblemStatement,
          engine_cfg: Optional[EngineConfig] = None,
          falsifier_cfg: Optional[FalsifierConfig] = None) -> ProofReport:
    """Run the full pipeline; never raises for in-contract inputs."""
    if engine_cfg is None:
        engine_cfg = EngineConfig()
    engine_cfg = engine_cfg.with_deadline()
    if falsifier_cfg is None:
        falsifier_cfg = FalsifierConfig()
    report = ProofReport(status=STATUS_UNSUPPORTED)

    def probe():
        import time
        if engine_cfg.deadline is not None and time.monotonic() > engine_cfg.deadline:
            raise ResourceLimitExceeded("timeout exceeded during falsification")

    # phase 1: numeric falsification
    try:
        ce, summary = falsify_numeric(ps, falsifier_cfg, deadline_probe=probe)
    except ResourceLimitExceeded:
        report.status = STATUS_RESOURCE
        report.message = "resource limit during numeric falsification"
        return report
    except (UnsupportedProblem, IndeqError) as e:
        report.status = STATUS_UNSUPPORTED
        report.message = str(e)
        return report
    report.falsification = summary
    if ce is not None:
        report.status = STATUS_DISPROVED
        report.counterexample = ce
        report.message = "exact violation at n=%d" % ce.n
        return report

    # phase 2: base cases
    try:
        base_formulas = build_base_cases(ps)
    except (UnsupportedProblem, MissingInitialTerm,
            LeadingCoefficientVanished) as e:
        report.status = STATUS_UNSUPPORTED
        report.message = str(e)
        return report
    for bf in base_formulas:
        text = to_text(bf)
        try:
            truth, stats = decide(bf, engine_cfg)
        except ResourceLimitExceeded as e:
            report.base_cases.append(PhaseOutcome(text, None, e.stats,
                                                  note=str(e)))
            report.status = STATUS_RESOURCE
            report.message = "resource limit while deciding a base case"
            return report
        report.base_cases.append(PhaseOutcome(text, truth, stats))
        if not truth:
            report.status = STATUS_BASE_FAILED
            report.message = "base case decided false"
            return report

    # phase 3: induction step
    try:
        step = build_induction_step(ps)
    except (UnsupportedProblem, IndeqError) as e:
        report.status = STATUS_UNSUPPORTED
        report.message = str(e)
        return report
    text = to_text(step)
    try:
        truth, stats = decide(step, engine_cfg)
    except ResourceLimitExceeded as e:
        report.induction_step = PhaseOutcome(text, None, e.stats, note=str(e))
        report.status = STATUS_RESOURCE
        report.message = "resource limit while deciding the induction step"
        return report
    report.induction_step = PhaseOutcome(text, truth, stats)
    if truth:
        report.status = STATUS_PROVED
        report.message = "base cases and induction step verified"
    else:
        report.status = STATUS_STEP_UNDECIDED
        report.message = ("the sufficient induction-step condition is false; "
                          "this does not refute the conjecture")
    return report
