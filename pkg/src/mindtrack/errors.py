"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError (and I/O)
-> 3, NumericalError -> 4.
"""


class MindtrackError(Exception):
    """Base class for all package errors."""


class ConfigError(MindtrackError):
    """Invalid run configuration (bad flag combination, missing path, ...)."""


class InvalidConfig(ConfigError):
    """Synthetic-corpus configuration violates its invariants."""


class DataError(MindtrackError):
    """Problem with input data (files, labels, shapes)."""


class SchemaError(DataError):
    """A record in an input file is malformed."""

    def __init__(self, line: int, field: str, message: str):
        super().__init__(f"line {line}, field {field!r}: {message}")
        self.line = line
        self.field = field


class DuplicateId(DataError):
    pass


class UnparsableDate(DataError):
    pass


class UnknownAuthor(DataError):
    pass


class MissingLabel(DataError):
    pass


class MissingAuthorType(DataError):
    pass


class GroupTooSmall(DataError):
    pass


class TooFewSamples(DataError):
    pass


class LabelOutsideClassList(DataError):
    pass


class EmptyClassRow(DataError):
    pass


class SingleClass(DataError):
    pass


class EmptyVocabulary(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class NumericalError(MindtrackError):
    """Numerical failure (singular matrix, degenerate optimisation)."""


class SingularInnovation(NumericalError):
    pass


class DegenerateCalibration(NumericalError):
    pass


class NegativeTimeStep(MindtrackError):
    pass


class RankDeficientWarning(UserWarning):
    """Emitted when a fitted projection has (near-)zero eigenvalues."""
