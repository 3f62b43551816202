"""Exception hierarchy shared across the package."""


class HarnessError(Exception):
    """Base class for every error raised by mfccsweep."""


class ConfigError(HarnessError, ValueError):
    """A configuration value violates its constraints."""


class WavFormatError(HarnessError, ValueError):
    """The byte stream is not a well-formed RIFF/WAVE container."""


class UnsupportedCodecError(WavFormatError):
    """The WAVE container holds an encoding we do not decode."""


class SignalTooShortError(HarnessError, ValueError):
    """The signal holds fewer samples than one analysis frame."""


class DegenerateFilterError(ConfigError):
    """A mel filter has no FFT bin inside its support."""


class DegenerateTrainingError(HarnessError, ValueError):
    """Training data does not contain both classes."""


class UndefinedMetricError(HarnessError, ValueError):
    """A ranking metric was requested on single-class data."""


class ManifestError(HarnessError, ValueError):
    """A dataset manifest row failed validation."""
