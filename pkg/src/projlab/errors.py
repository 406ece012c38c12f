"""Exception types shared by all modules."""


class ProjlabError(Exception):
    """Base class for every error raised by projlab."""


class InvalidDimensionError(ProjlabError, ValueError):
    """A matrix dimension is not a positive integer."""


class InvalidRankError(ProjlabError, ValueError):
    """Projection ranks are outside the admissible range."""


class ContractViolation(ProjlabError, ValueError):
    """An input does not satisfy the documented precondition."""


class DomainError(ProjlabError, ValueError):
    """A scalar argument is outside the domain of a formula."""


class InvalidFieldError(ProjlabError, ValueError):
    """A field function is not finite on [0, 1]."""


class NumericGuardError(ProjlabError, RuntimeError):
    """A numerical method refuses to run because its output would be unreliable."""


class ConvergenceError(ProjlabError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    Attributes
    ----------
    best : object
        Best iterate found before giving up.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CorpusIntegrityError(ProjlabError):
    """The golden corpus is malformed (e.g. a derived record lacks its oracle)."""
