"""Exception types shared across the package."""


class HpadeError(Exception):
    """Base class for all package errors."""


class SeriesError(HpadeError):
    """Invalid series construction or coefficient request."""


class SolveError(HpadeError):
    """Linear solve failed or its preconditions are violated."""


class RootFindingError(HpadeError):
    """Root iteration did not meet the residual bound.

    Carries the best iterate found so the caller can retry at higher
    precision without starting from scratch.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class WindowError(HpadeError):
    """Not enough data points for the requested estimate."""


class StructureError(HpadeError):
    """The difference identity (or another structural check) is violated."""


class HypothesisUnmet(HpadeError):
    """A theorem hypothesis required by a detector does not hold on the run."""


class ConfigError(HpadeError):
    """Bad run configuration; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
