"""Mapping Keras checkpoints onto UEW files.

The export walks the tensor plan implied by the architecture string,
pulls each tensor out of the model by layer name, fixes up the layout
differences (transposed-conv kernels store (kh, kw, c_out, c_in) on the
Keras side; batch-norm variance is stored with the training epsilon
already added), and hands the ordered dict to the UEW writer. Every
mapped tensor is recorded in an ExportMap so the caller can see exactly
what went where, and the trainable scalar total is reconciled against
the count the plan predicts.
"""

import errno
import os
from dataclasses import dataclass

import keras
import numpy as np

from . import uewfile
from .errors import ExportError, ShapeMismatchError, UnmatchedLayerError
from .refmodel import build_reference_model
from .spec import entry_plan, parse_spec, trainable_scalars


@dataclass(frozen=True)
class MapRow:
    entry: str  # UEW entry name
    source: str  # where in the model it came from
    shape: tuple
    scalars: int
    trainable: bool


@dataclass(frozen=True)
class ExportMap:
    spec_text: str
    rows: tuple
    trainable_total: int
    expected_trainable: int


def format_export_map(emap):
    """Render an ExportMap as an aligned text table with a totals line."""
    header = ("entry", "source", "shape", "scalars")
    cells = [header]
    for row in emap.rows:
        cells.append((row.entry, row.source, str(row.shape), f"{row.scalars:,}"))
    widths = [max(len(r[i]) for r in cells) for i in range(4)]
    lines = []
    for r in cells:
        lines.append(
            "  ".join(
                r[i].ljust(widths[i]) if i < 3 else r[i].rjust(widths[i])
                for i in range(4)
            ).rstrip()
        )
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append(
        f"trainable scalars mapped: {emap.trainable_total:,}"
        f" (plan for {emap.spec_text}: {emap.expected_trainable:,})"
    )
    return "\n".join(lines)


def _fetch_layer(model, name):
    try:
        return model.get_layer(name=name)
    except ValueError:
        raise UnmatchedLayerError(f"model has no layer named {name!r}") from None


def _conv_arrays(layer, kind):
    ws = layer.get_weights()
    if len(ws) != 2:
        raise UnmatchedLayerError(
            f"layer {layer.name!r} has {len(ws)} weights, expected kernel and bias"
        )
    kernel, bias = ws
    if kernel.ndim != 4 or bias.ndim != 1:
        raise UnmatchedLayerError(f"layer {layer.name!r} is not a 2-d convolution")
    if kind == "upconv":
        # Keras Conv2DTranspose kernels are (kh, kw, c_out, c_in).
        kernel = np.ascontiguousarray(np.transpose(kernel, (0, 1, 3, 2)))
        srcs = {"kernel": "kernel (axes 2<->3 swapped)", "bias": "bias"}
    else:
        srcs = {"kernel": "kernel", "bias": "bias"}
    return {"kernel": kernel, "bias": bias}, srcs


def _norm_arrays(layer):
    eps = getattr(layer, "epsilon", None)
    ws = layer.get_weights()
    if eps is None or len(ws) != 4:
        raise UnmatchedLayerError(f"layer {layer.name!r} is not batch normalization")
    gamma, beta, mean, var = ws
    var = (var.astype(np.float64) + float(eps)).astype(np.float32)
    arrays = {"mean": mean, "var": var, "gamma": gamma, "beta": beta}
    srcs = {
        "mean": "moving_mean",
        "var": "moving_variance (+epsilon)",
        "gamma": "gamma",
        "beta": "beta",
    }
    return arrays, srcs


def collect_entries(model, spec, input_channels):
    """Ordered (tensors, map rows) for a model, checked against the plan."""
    plan = entry_plan(spec, input_channels)
    planned_layers = {e.layer for e in plan}
    for layer in model.layers:
        if layer.weights and layer.name not in planned_layers:
            raise UnmatchedLayerError(
                f"model layer {layer.name!r} holds weights but has no place"
                f" in {spec.text}"
            )
    tensors = {}
    rows = []
    cache = {}
    for e in plan:
        if e.layer not in cache:
            layer = _fetch_layer(model, e.layer)
            if e.kind == "norm":
                cache[e.layer] = _norm_arrays(layer)
            else:
                cache[e.layer] = _conv_arrays(layer, e.kind)
        arrays, srcs = cache[e.layer]
        pname = e.name.split(".", 1)[1]
        arr = arrays[pname]
        if tuple(arr.shape) != e.shape:
            raise ShapeMismatchError(
                f"{e.name}: plan wants {e.shape}, model supplies {tuple(arr.shape)}"
            )
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        tensors[e.name] = arr
        rows.append(
            MapRow(e.name, f"{e.layer}/{srcs[pname]}", e.shape, arr.size, e.trainable)
        )
    return tensors, rows


def export_model(model, spec_text, out_path, source=None):
    """Export a live Keras model; returns the ExportMap."""
    spec = parse_spec(spec_text)
    shape = model.input_shape
    if not isinstance(shape, tuple) or len(shape) != 4:
        raise ExportError(f"expected one NHWC input, model has {shape}")
    input_channels = int(shape[-1])
    tensors, rows = collect_entries(model, spec, input_channels)
    total = sum(r.scalars for r in rows if r.trainable)
    expected = trainable_scalars(spec, input_channels)
    if total != expected:
        raise ExportError(
            f"mapped {total} trainable scalars but the plan demands {expected}"
        )
    provenance = f"exported from {source or model.name}"
    uewfile.write_float_file(out_path, spec.text, tensors, provenance)
    return ExportMap(spec.text, tuple(rows), total, expected)


def load_model_file(path, spec_text, input_size=(128, 128, 3)):
    """Load .keras/.h5 directly, or rebuild around a bare .weights.h5."""
    p = str(path)
    if not os.path.exists(p):
        raise FileNotFoundError(errno.ENOENT, "no such model file", p)
    if p.endswith(".weights.h5"):
        model = build_reference_model(spec_text, input_size)
        try:
            model.load_weights(p)
        except Exception as exc:
            raise ShapeMismatchError(
                f"checkpoint does not fit {spec_text}: {exc}"
            ) from None
        return model
    if p.endswith((".keras", ".h5")):
        return keras.models.load_model(p, compile=False)
    raise ExportError(f"unrecognized model file suffix: {p}")


def export_file(model_path, spec_text, out_path, input_size=(128, 128, 3)):
    model = load_model_file(model_path, spec_text, input_size)
    return export_model(
        model, spec_text, out_path, source=os.path.basename(str(model_path))
    )
