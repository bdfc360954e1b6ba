"""indeq: an inductive prover for inequalities about sequences defined by
fixed-order polynomial recurrences, built on an exact cylindrical algebraic
decomposition decision procedure for Tarski formulas."""

__version__ = "0.1.0"
