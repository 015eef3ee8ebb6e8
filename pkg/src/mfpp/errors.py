"""Exception hierarchy.

Validation problems derive from :class:`ValueError`; numerical failures
derive from :class:`NumericalError` so callers (and the CLI) can tell the
two apart.
"""


class MfppError(Exception):
    pass


class InvalidParams(MfppError, ValueError):
    pass


class DomainError(InvalidParams):
    pass


class DegenerateRegime(MfppError, ValueError):
    """An asymptotic form was requested where it is undefined."""


class GridMismatch(InvalidParams):
    pass


class NonMonotoneLambda(InvalidParams):
    pass


class InsufficientData(MfppError, ValueError):
    pass


class NumericalError(MfppError, ArithmeticError):
    pass


class NoConvergence(NumericalError):
    pass


class SCapExceeded(NumericalError):
    """The subordinator walk did not pass the last observation time in time."""
