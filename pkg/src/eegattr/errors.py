"""Exception hierarchy shared across the package."""


class EegattrError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(EegattrError):
    """A tensor shape does not match what a layer or file declares."""


class NonFiniteError(EegattrError):
    """A NaN or Inf showed up where only finite values are valid."""


class ConfigError(EegattrError):
    """Invalid configuration value (hyperparameter, method name, ...)."""


class FormatError(EegattrError):
    """A persisted file does not follow its documented format."""


class VersionError(FormatError):
    """A persisted file declares an unsupported format version."""


class ChecksumError(FormatError):
    """The CRC-32 of a binary blob does not match its manifest."""


class TrainingDivergedError(EegattrError):
    """Training produced a non-finite loss."""
