"""Exception hierarchy shared across the library.

Everything raised on bad user input derives from :class:`GcmError`, so callers
(including the CLI) can distinguish input problems from genuine numeric
failures (:class:`NumericError`).
"""


class GcmError(Exception):
    """Base class for all errors raised by this library."""


class GraphError(GcmError):
    """Malformed graph text, cycles, self-loops, or unknown nodes."""


class DataError(GcmError):
    """Malformed tabular data: ragged rows, missing cells, unknown columns."""


class FitError(GcmError):
    """A mechanism cannot be fit: empty input, too few rows, kind mismatch."""


class QueryError(GcmError):
    """A query's precondition is violated (unknown edge, wrong column type, ...)."""


class UnseenCategoryError(GcmError):
    """A categorical parent value was never observed when the mechanism was fit."""


class NonInvertibleError(GcmError):
    """Noise abduction requested on a mechanism that cannot be inverted."""


class SerializationError(GcmError):
    """Corrupt model payload or unsupported schema version."""


class NumericError(GcmError):
    """A numeric routine failed (non-finite results, divergence)."""
