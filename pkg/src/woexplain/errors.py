"""Exception hierarchy for woexplain.

Every error raised on purpose by this package derives from WoeError, so
callers can catch one type. The CLI maps subfamilies to exit codes:
configuration and validation problems versus I/O and oracle failures.
"""


class WoeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WoeError):
    """Command line arguments or option combinations are invalid."""


class InvalidParameterError(WoeError):
    """A numeric or enum parameter is outside its allowed range."""


class InvalidHypothesisError(WoeError):
    """A hypothesis set is empty, overlapping, or otherwise malformed."""


class UnknownLabelError(WoeError):
    """A class label falls outside the model's label universe."""


class EmptyContrastError(WoeError):
    """A contrast set came out empty, so no log-odds is defined."""


class InvalidDataError(WoeError):
    """Input arrays are malformed: wrong shape, non-finite, or bad dtype."""


class InsufficientDataError(WoeError):
    """Too few samples to fit the requested model."""


class InvalidModelError(WoeError):
    """A model violates its structural invariants or has a bad schema."""


class InvalidPartitionError(WoeError):
    """Feature groups overlap, contain bad indices, or miss coordinates."""


class MissingEvidenceError(WoeError):
    """A computation needs feature values that are not observed."""


class NothingToExplainError(WoeError):
    """The model has a single class, so there is nothing to contrast."""


class DegeneratePriorError(WoeError):
    """A hypothesis set has zero prior mass, so its log-odds diverges."""


class DegenerateDensityError(WoeError):
    """A density is degenerate (zero variance) where a proper one is needed."""


class NumericalConditioningError(WoeError):
    """A covariance factorization failed during conditioning."""


class CsvParseError(WoeError):
    """A CSV file failed to parse; carries the offending location.

    Attributes:
        row: 1-based data row index of the failure, if known.
        column: column name or index of the failure, if known.
    """

    def __init__(self, message: str, row: int | None = None, column: str | int | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class OracleProtocolError(WoeError):
    """An external labeling command broke the line protocol.

    Attributes:
        line: 1-based output line index of the failure, if known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} (output line {line})"
        super().__init__(message)
