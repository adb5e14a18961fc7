"""Exception taxonomy for the whole package.

Three base classes map onto the CLI exit codes: ConfigError -> 2,
DataError -> 3, anything else derived from FedtopoError -> 4.
"""

from __future__ import annotations


class FedtopoError(Exception):
    """Base class for every error raised deliberately by this package."""


# --------------------------------------------------------------------------
# configuration errors (CLI exit code 2)


class ConfigError(FedtopoError):
    pass


class ConfigParseError(ConfigError):
    """Syntax error in a config file; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ConfigValidationError(ConfigError):
    """Semantic error in a parsed config; carries the offending key name."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class MissingConfigError(ConfigError):
    """Config file itself is absent or unreadable."""


# --------------------------------------------------------------------------
# data errors (CLI exit code 3)


class DataError(FedtopoError):
    pass


class WrongMagicError(DataError):
    pass


class TruncatedPayloadError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class LabelOutOfRangeError(DataError):
    pass


class CountMismatchError(DataError):
    pass


class MissingDataError(DataError):
    """A dataset file referenced by the experiment cannot be found."""


class TooManyClientsError(DataError):
    pass


class DegenerateFractionError(DataError):
    pass


# --------------------------------------------------------------------------
# runtime errors (CLI exit code 4)


class ShapeMismatchError(FedtopoError):
    pass


class StructureMismatchError(FedtopoError):
    pass


class EmptyShardError(FedtopoError):
    pass


class EmptyInputError(FedtopoError):
    pass


class ZeroTotalWeightError(FedtopoError):
    pass


class EmptyPopulationError(FedtopoError):
    pass


class InvalidGroupingError(FedtopoError):
    pass


class EmptyRoundSampleError(FedtopoError):
    pass


class EmptyTestSetError(FedtopoError):
    pass


class LengthMismatchError(FedtopoError):
    pass


class ClassOutOfRangeError(FedtopoError):
    pass


class EmptyMatrixError(FedtopoError):
    pass


class ScopeMisuseError(FedtopoError):
    pass
