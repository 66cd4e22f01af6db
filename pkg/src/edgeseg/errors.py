"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: NumericError -> 4, everything else
derived from EdgeSegError -> 3 (argparse itself owns usage errors -> 2).
"""


class EdgeSegError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(EdgeSegError):
    """A tensor or kernel has the wrong rank, size, or channel count."""


class SpecError(EdgeSegError):
    """An invalid model spec, preset name, or configuration value."""


class BindingError(EdgeSegError):
    """A weight set does not match the graph it is applied to."""


class DataFormatError(EdgeSegError):
    """A file on disk is not a valid image, mask, or weight file."""


class BadMagicError(DataFormatError):
    """Weight file does not start with the expected magic bytes."""


class ChecksumError(DataFormatError):
    """Weight file checksum does not match its contents."""


class TruncationError(DataFormatError):
    """Weight file ends before the declared contents are complete."""


class DuplicateTensorError(DataFormatError):
    """Weight file declares the same tensor name twice."""


class CalibrationError(EdgeSegError):
    """Calibration input is unusable or calibration data is missing."""


class NumericError(EdgeSegError):
    """Non-finite values or an arithmetic range violation."""
