"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: DataError -> 3,
StreamCorruptError -> 4, ModelMismatchError -> 5.
"""


class MocapCodecError(Exception):
    """Base class for all package errors."""


class DataError(MocapCodecError):
    """Malformed or invalid input data (motion files, parameters)."""


class NonFiniteValueError(DataError):
    """Input contains NaN or Inf."""


class InvalidDimensionError(DataError):
    """Coordinate dimension name outside {x, y, z}."""


class ShapeMismatchError(DataError):
    """Operands have incompatible shapes."""


class FormatMismatchError(MocapCodecError):
    """Wrong magic bytes or unsupported version in a binary file."""


class StreamCorruptError(MocapCodecError):
    """Compressed stream failed its CRC or is truncated."""


class ModelMismatchError(MocapCodecError):
    """Transform model does not match the stream or sequence."""


class InvariantViolationError(MocapCodecError):
    """A validated invariant (orthogonality, checksum) does not hold."""


class InvalidSweepError(DataError):
    """Benchmark sweep was configured with no parameter values."""
