"""Exception hierarchy.

Each class carries an ``exit_code`` used by the command-line front end.
"""


class CMechError(Exception):
    exit_code = 1


class DataError(CMechError):
    """Malformed input: bad spec file, unknown symbols, unusable data."""

    exit_code = 4


class InvalidSpec(DataError):
    pass


class AlphabetMismatch(DataError):
    pass


class ZeroProbabilityHistory(DataError):
    pass


class MultipleRecurrentClasses(DataError):
    pass


class SequenceTooShort(DataError):
    pass


class ResourceGuard(CMechError):
    exit_code = 3


class BlockTooLarge(ResourceGuard):
    pass


class TooManyHistories(ResourceGuard):
    pass


class NonDeterministicAtHorizon(CMechError):
    """The history window is too short for a unifilar state partition."""

    exit_code = 5


class DeterminizationDiverged(CMechError):
    exit_code = 5

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
