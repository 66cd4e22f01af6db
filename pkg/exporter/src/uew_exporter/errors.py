"""Exception hierarchy for the exporter."""


class ExporterError(Exception):
    """Base class for everything this package raises on purpose."""


class SpecError(ExporterError):
    """Malformed or unsupported architecture string."""


class FormatError(ExporterError):
    """A UEW byte stream violates the container contract."""


class ExportError(ExporterError):
    """The model cannot be mapped onto the requested architecture."""


class UnmatchedLayerError(ExportError):
    """A required layer is missing, or an extra weighted layer exists."""


class ShapeMismatchError(ExportError):
    """A layer exists but its weights have the wrong shape."""
