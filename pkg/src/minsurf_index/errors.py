"""Exception hierarchy shared by all modules."""


class MinsurfError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MinsurfError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConsistencyError(MinsurfError, RuntimeError):
    """A constructed object violates one of its own invariants."""


class AccuracyError(MinsurfError):
    """The requested tolerance cannot be met on the given grid.

    The achieved error estimate is kept on ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class InsufficientRangeError(MinsurfError):
    """A fit window does not span enough of the end."""


class IntegrabilityError(MinsurfError):
    """An integral over the surface diverges under the tail model."""


class DivergenceError(IntegrabilityError):
    """A limit object does not exist (e.g. harmonic limit in dimension 3)."""


class DegenerateInputError(MinsurfError, ValueError):
    """Input is degenerate (identically zero field, empty family, ...)."""


class StencilError(MinsurfError, IndexError):
    """A sample point is too close to the grid boundary for the stencil."""


class InconclusiveError(MinsurfError):
    """A computation stopped before it could certify its answer.

    Partial results are kept on ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
