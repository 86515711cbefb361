"""Exception hierarchy shared across the package."""


class FunqueError(Exception):
    """Base class for all errors raised by funqueplus."""


class DecodeError(FunqueError):
    """Raw video bytes could not be decoded (e.g. truncated file)."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class SampleRangeError(DecodeError):
    """A 10-bit sample word exceeded 1023."""


class ManifestError(FunqueError):
    """A dataset manifest row is malformed."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class ConfigError(FunqueError):
    """CSF parameters, weight tables or run configuration are missing or invalid."""


class InputTooSmallError(FunqueError):
    """A plane is too small for the requested number of wavelet levels."""


class PoolingError(FunqueError):
    """Temporal pooling had no valid frames to average."""


class TrainError(FunqueError):
    """A fusion regressor could not be trained."""


class PredictError(FunqueError):
    """A feature vector is incompatible with a fusion model."""
