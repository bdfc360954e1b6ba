"""Exception taxonomy shared across the package."""

from __future__ import annotations


class IndeqError(Exception):
    """Base class for all package-specific errors."""


class MissingVariable(IndeqError):
    """A polynomial evaluation lacks a value for some variable."""


class ZeroPolynomial(IndeqError):
    """Operation undefined for the zero polynomial."""


class NotUnivariate(IndeqError):
    """Operation requires a univariate polynomial."""


class BothConstant(IndeqError):
    """Resultant of two polynomials neither of which involves the variable."""


class FormulaSyntaxError(IndeqError):
    """Parse failure, carrying a position in the source text."""

    def __init__(self, message: str, position: int):
        super().__init__("%s (at offset %d)" % (message, position))
        self.position = position


class UnknownIdentifier(FormulaSyntaxError):
    pass


class NestedAbsTooDeep(IndeqError):
    """abs() nesting exceeded the configured lowering bound."""


class NotClosed(IndeqError):
    """A decision was requested for a formula with free variables."""


class ResourceLimitExceeded(IndeqError):
    """Cell cap or timeout exceeded; carries the statistics at abort."""

    def __init__(self, message: str, stats=None):
        super().__init__(message)
        self.stats = stats


class UnsupportedProblem(IndeqError):
    """The problem statement falls outside the supported input class."""


class MissingInitialTerm(IndeqError):
    """A required initial sequence value is not available."""


class LeadingCoefficientVanished(IndeqError):
    """Recurrence unrolling hit a vanishing leading coefficient."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index
