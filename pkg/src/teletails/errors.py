"""Exception types shared across the package.

The command line maps these onto exit codes: configuration problems
exit 2, data problems exit 3, numerical failures exit 4.
"""


class TeletailsError(Exception):
    """Base class for package errors."""


class ConfigError(TeletailsError):
    """Invalid configuration file or command arguments."""


class DataError(TeletailsError):
    """Input data violates a documented contract."""


class ParseError(DataError):
    """Malformed input file."""


class DegenerateDataError(DataError):
    """Data carries no usable signal (constant column, comonotone pair)."""


class InsufficientDataError(DataError):
    """Too few rows for the requested statistic."""


class DomainError(DataError):
    """Numeric argument outside the function domain."""


class NumericError(TeletailsError):
    """Numerical failure during optimisation or density evaluation."""
