"""Exception hierarchy shared across the package."""


class GsirError(Exception):
    """Base class for all package errors."""


class InvalidInput(GsirError, ValueError):
    """An argument violates a documented precondition."""


class InvalidSpec(InvalidInput):
    """A kernel or scenario specification is malformed."""


class PreconditionViolation(InvalidInput):
    """A structural precondition between arguments does not hold."""


class NotPositiveDefinite(GsirError, ArithmeticError):
    """Cholesky factorisation failed; usually fixed by a larger jitter."""


class AssumptionViolation(GsirError, ArithmeticError):
    """A modelling assumption required by an operator construction fails."""


class GenerationFailure(GsirError, RuntimeError):
    """A random generator could not satisfy its constraints."""


class OracleInconsistency(GsirError, AssertionError):
    """Two independent computations of the same quantity disagree."""
