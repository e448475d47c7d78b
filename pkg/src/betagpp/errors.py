"""Exception hierarchy shared by all modules."""


class BetaGppError(Exception):
    """Base class for library errors."""


class DomainError(BetaGppError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class TruncationError(BetaGppError, ArithmeticError):
    """A truncated series or product did not meet its tolerance.

    ``diagnostics`` carries the quantities that were inspected.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConvergenceError(BetaGppError, ArithmeticError):
    """An iterative method failed to converge within its sweep budget."""


class LoadError(BetaGppError, IOError):
    """Deployment or region input could not be parsed."""


class FitError(BetaGppError):
    """The fitting procedure could not produce a meaningful result."""
