"""uew-exporter: write trained Keras U-Net weights into UEW containers."""

from .errors import (
    ExporterError,
    ExportError,
    FormatError,
    ShapeMismatchError,
    SpecError,
    UnmatchedLayerError,
)
from .export import (
    ExportMap,
    MapRow,
    collect_entries,
    export_file,
    export_model,
    format_export_map,
    load_model_file,
)
from .refmodel import build_reference_model
from .spec import (
    ModelSpec,
    PlanEntry,
    channel_widths,
    entry_plan,
    parse_spec,
    trainable_scalars,
)
from .uewfile import float_file_bytes, parse_file_bytes, write_float_file

__all__ = [
    "ExporterError",
    "ExportError",
    "FormatError",
    "ShapeMismatchError",
    "SpecError",
    "UnmatchedLayerError",
    "ExportMap",
    "MapRow",
    "collect_entries",
    "export_file",
    "export_model",
    "format_export_map",
    "load_model_file",
    "build_reference_model",
    "ModelSpec",
    "PlanEntry",
    "channel_widths",
    "entry_plan",
    "parse_spec",
    "trainable_scalars",
    "float_file_bytes",
    "parse_file_bytes",
    "write_float_file",
]
