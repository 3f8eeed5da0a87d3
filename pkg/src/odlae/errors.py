"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands do not have conforming shapes."""


class InvalidInputError(ValueError):
    """A value violates an operation's numeric preconditions (non-finite, out of range)."""


class ConfigError(ValueError):
    """A run configuration or policy parameter is invalid."""


class DataError(ValueError):
    """A stream record is malformed; the message identifies the offending record."""


class CheckpointError(ValueError):
    """A checkpoint file is corrupt or written by an incompatible format version."""
