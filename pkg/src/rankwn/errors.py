"""Exception and warning types raised across the package."""


class InvalidInput(ValueError):
    """Non-finite or otherwise unusable observations."""


class TooShort(ValueError):
    """Sample too short for the requested statistic."""


class TooLarge(ValueError):
    """Brute-force enumeration would exceed its work budget."""


class InvalidScore(ValueError):
    """Score functions that are non-finite or give a degenerate statistic."""


class InvalidAlpha(ValueError):
    """Significance level outside the open unit interval."""


class InvalidL(ValueError):
    """Number of summed order statistics out of range."""


class DivergedModel(RuntimeError):
    """A simulated trajectory produced non-finite values."""


class ParseError(ValueError):
    """Malformed CSV input."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class EmptyInput(ValueError):
    """Input file holds no data rows."""


class UsageError(ValueError):
    """Invalid command-line flags."""


class TiesWarning(UserWarning):
    """Tied observations were broken by position order."""


class NonStationaryWarning(RuntimeWarning):
    """Autoregressive coefficients with spectral radius of at least one."""
