"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary bad-argument cases; the classes
here exist where callers (in particular the CLI) need to tell failure
categories apart.
"""


class ConfigError(Exception):
    """A run configuration is missing, malformed, or inconsistent."""


class DataFormatError(Exception):
    """A data file has the wrong magic bytes or an unsupported version."""


class CorruptFileError(DataFormatError):
    """A data file parses but its payload is truncated or inconsistent."""


class ValidationError(ValueError):
    """Numeric content violates an invariant (non-finite values, bad shape)."""


class DegenerateScalingError(ValueError):
    """Min-max scaling was requested on constant data."""


class EmptySpectrumError(ValueError):
    """A decomposition produced no usable modes (e.g. all-zero input)."""


class UndefinedRelativeError(ValueError):
    """A relative error was requested against a zero-norm reference."""


class TrainingDivergedError(RuntimeError):
    """Training loss became non-finite.  Carries the offending epoch."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class MissingArtifactError(FileNotFoundError):
    """A pipeline stage input is absent; names the command that produces it."""

    def __init__(self, path, producer: str):
        self.path = path
        self.producer = producer
        super().__init__(
            f"missing input file '{path}': run the '{producer}' command first"
        )
