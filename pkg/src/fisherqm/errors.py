"""Exception and warning types.

Errors split into two families so the CLI can map them to exit codes:
``DataError`` (bad input, exit 2) and ``NumericalError`` (solver or
optimizer failure, exit 3).
"""


class FisherQMError(Exception):
    """Base class for all library errors."""


class DataError(FisherQMError, ValueError):
    """Input data violates a precondition."""


class NumericalError(FisherQMError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""


class ZeroMass(DataError):
    pass


class NegativeDensity(DataError):
    pass


class NonUniformGrid(DataError):
    pass


class NotConfining(DataError):
    pass


class SignError(DataError):
    pass


class DomainError(DataError):
    pass


class NonPositivePrice(DataError):
    pass


class DegenerateData(DataError):
    pass


class InsufficientData(DataError):
    pass


class NoBoundState(NumericalError):
    pass


class GridTooNarrow(NumericalError):
    pass


class PerturbationInvalid(NumericalError):
    pass


class ClampMassExceeded(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class TailMassWarning(UserWarning):
    """Density is not negligible at the grid edges."""


class PerturbationWarning(UserWarning):
    """Perturbation parameters are outside the comfortable small-coupling range."""
