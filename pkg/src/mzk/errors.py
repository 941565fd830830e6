"""Exception hierarchy used across the package."""


class MZKError(Exception):
    """Base class for every error raised by :mod:`mzk`."""


class ConfigurationError(MZKError, ValueError):
    """Inconsistent grid, bandwidth or parameter choice.

    ``errors`` lists every individual problem when several were collected.
    """

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = list(errors) if errors else [message]


class DataError(MZKError, ValueError):
    """Input data unsuitable for the requested computation."""


class OracleLimitError(MZKError):
    """A brute-force oracle was asked to run above its documented size limit."""


class ResourceError(MZKError, MemoryError):
    """A requested working buffer exceeds the memory guard."""


class AccuracyError(MZKError):
    """A quadrature or tolerance budget could not be met.

    ``achieved`` carries the best bound that was reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class BlowUpError(MZKError, FloatingPointError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class StiffnessError(MZKError):
    """Adaptive step size fell below the minimum allowed step."""

    def __init__(self, message, time=None, dt=None):
        super().__init__(message)
        self.time = time
        self.dt = dt
