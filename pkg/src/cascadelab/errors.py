"""Exception types shared across the package."""


class CascadeLabError(Exception):
    """Base class for errors raised by cascadelab."""


class ParseError(CascadeLabError, ValueError):
    """A malformed input record.

    ``line`` is 1-based and refers to the offending record (the header,
    when present, is line 1).
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(CascadeLabError, RuntimeError):
    """An iterative method stopped without meeting its tolerance."""

    def __init__(self, message, estimate=None, residual=None, trace=None):
        self.estimate = estimate
        self.residual = residual
        self.trace = trace
        super().__init__(message)
