"""Exception hierarchy shared by all modules."""


class GobmError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(GobmError, ValueError):
    pass


class DegenerateSeriesError(GobmError, ValueError):
    """The series carries no information (e.g. constant prices)."""


class InvalidCandidateError(GobmError, ValueError):
    """A threshold candidate whose fit cannot be scored."""


class NoValidThresholdError(GobmError, RuntimeError):
    pass


class TestUnavailableError(GobmError, ValueError):
    """The equal-volatility test cannot be built from the given fit."""

    __test__ = False  # keep pytest from collecting this class
