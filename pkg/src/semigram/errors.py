"""Exception hierarchy shared by all semigram modules.

The CLI maps these onto stable exit codes, so new error conditions should
subclass one of the existing categories rather than raising bare built-ins.
"""


class SemigramError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SemigramError, ValueError):
    """Operands have incompatible or invalid shapes."""


class ParseError(SemigramError, ValueError):
    """A matrix or system description file could not be parsed."""


class PreconditionError(SemigramError, ValueError):
    """A documented precondition of an operation was violated."""


class NotSemistableError(PreconditionError):
    """An operation requiring a (semi)stable generator received one that is not."""


class InvalidSelectionError(SemigramError, ValueError):
    """A mode selection violates the rules of invariant truncation."""


class ConditioningError(SemigramError):
    """A computation was abandoned because of numerical ill-conditioning."""


class InconsistencyError(SemigramError):
    """A computed solution failed its residual verification."""


class QuadratureError(SemigramError):
    """Adaptive quadrature exhausted its panel budget before converging.

    Carries the best available estimate and the tolerance actually achieved
    so callers can decide whether the partial result is still usable.
    """

    def __init__(self, message, estimate=None, achieved_tol=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_tol = achieved_tol
