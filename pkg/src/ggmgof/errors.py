"""Exception types shared across the package."""


class GgmGofError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefiniteError(GgmGofError):
    """A matrix that must be positive definite is not.

    Carries ``smallest_eigenvalue`` when it was computed.
    """

    def __init__(self, message, smallest_eigenvalue=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class ColumnSingularError(GgmGofError):
    """The covariance submatrix selected by one column's support is singular."""

    def __init__(self, column, condition):
        super().__init__(
            f"support submatrix for column {column} is singular "
            f"(condition estimate {condition:.3e} > 1e12)"
        )
        self.column = column
        self.condition = condition


class InsufficientDataError(GgmGofError):
    """Too few observations for the requested operation."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class DegenerateEstimateError(GgmGofError):
    """An estimated quantity that must be positive is not."""


class SingularDesignError(GgmGofError):
    """The regression design matrix is rank deficient."""


class ParseError(GgmGofError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class RegionMappingError(GgmGofError):
    """A state is missing from the region mapping table."""


class SimulationError(GgmGofError):
    """A Monte Carlo replication failed; carries the replication index."""

    def __init__(self, replication, message):
        super().__init__(f"replication {replication}: {message}")
        self.replication = replication
