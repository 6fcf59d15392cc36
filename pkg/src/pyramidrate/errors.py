"""Exception hierarchy shared by all modules."""


class PyramidRateError(Exception):
    """Base class for every error raised by this package."""


class Infeasible(PyramidRateError):
    """The normals do not bound a cone with non-empty interior."""


class NotSalient(PyramidRateError):
    """A generated cone is not salient (its dual has empty interior)."""


class HypothesisViolation(PyramidRateError):
    """A model fails one of the standing hypotheses A1-A5."""

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


class NotCoercive(PyramidRateError):
    """The Laplace transform is not coercive on the dual cone."""


class NoConvergence(PyramidRateError):
    """An iterative solver hit its iteration cap."""


class BracketFailure(PyramidRateError):
    """No sign change found while bracketing a root."""


class DriftNotInterior(PyramidRateError):
    pass


class Trapped(PyramidRateError):
    """All steps stay in the cone; the walk never exits."""


class DomainError(PyramidRateError, ValueError):
    pass


class Degenerate(PyramidRateError):
    """A survival curve carries no usable decay information."""


class CapacityExceeded(PyramidRateError):
    pass


class ParseError(PyramidRateError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
