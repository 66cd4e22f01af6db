"""Post-training quantization: calibration and weight conversion.

Calibration runs the float path (with batchnorm already folded into the
convolutions) over a set of representative images and records per-tensor
activation ranges, including the input. Every range is widened to include
zero; a constant activation widens to a unit interval. Weight conversion
then emits per-tensor symmetric int8 kernels, int32 biases at scale
s_in * s_w, and the affine activation parameters the runtime needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .builder import Graph, fused_relu_targets
from .engine import WeightSet, fold_batchnorm, fold_graph_structure, run_float
from .errors import CalibrationError, NumericError
from .qops import (
    QuantParams,
    affine_from_range,
    quantize_bias,
    quantize_kernel,
)

MAX_CONV_FAN_IN = 9 * 1024


@dataclass
class QuantWeightSet:
    """Everything the int8 runtime needs for one model.

    Keys follow the folded graph: kernels/biases are parameter names,
    act_qp is keyed by node name (plus "input"). input_scales records the
    activation scale each bias was baked against.
    """

    spec_string: str
    kernels: dict[str, np.ndarray]
    kernel_scales: dict[str, float]
    biases: dict[str, np.ndarray]
    act_qp: dict[str, QuantParams]
    input_scales: dict[str, float] = field(default_factory=dict)
    provenance: str = ""


def propagate_qparams(
    folded: Graph, act_qp: dict[str, QuantParams]
) -> dict[str, QuantParams]:
    """Affine parameters each node's output tensor actually carries.

    relu and maxpool pass their input's parameters through unchanged;
    conv/upconv requantize to the fused relu's entry when one exists;
    concat and sigmoid requantize to their own entries.
    """
    fused = fused_relu_targets(folded)

    def entry(name: str) -> QuantParams:
        try:
            return act_qp[name]
        except KeyError:
            raise CalibrationError(f"no calibration entry for tensor {name!r}") from None

    out: dict[str, QuantParams] = {"input": entry("input")}
    for node in folded.nodes:
        if node.op == "input":
            continue
        if node.op in ("conv", "upconv"):
            out[node.name] = entry(fused.get(node.name, node.name))
        elif node.op in ("relu", "maxpool"):
            out[node.name] = out[node.inputs[0]]
        else:  # concat, sigmoid
            out[node.name] = entry(node.name)
    return out


def calibrate(
    graph: Graph, weights: WeightSet, calib_images
) -> dict[str, QuantParams]:
    """Observe per-tensor activation ranges over the calibration set."""
    images = list(calib_images)
    if not images:
        raise CalibrationError("calibration set is empty")
    folded, wfold = fold_batchnorm(graph, weights)
    lo: dict[str, float] = {}
    hi: dict[str, float] = {}
    for image in images:
        collected: dict[str, np.ndarray] = {}
        run_float(folded, wfold, image, collect=collected)
        for name, t in collected.items():
            tmin, tmax = float(t.min()), float(t.max())
            lo[name] = min(lo.get(name, tmin), tmin)
            hi[name] = max(hi.get(name, tmax), tmax)
    return {name: affine_from_range(lo[name], hi[name]) for name in lo}


def quantize_weights(
    graph: Graph,
    weights: WeightSet,
    act_qp: dict[str, QuantParams],
    provenance: str = "",
) -> QuantWeightSet:
    """Convert a float WeightSet to int8/int32 using calibrated ranges."""
    folded, wfold = fold_batchnorm(graph, weights)
    carried = propagate_qparams(folded, act_qp)
    kernels: dict[str, np.ndarray] = {}
    scales: dict[str, float] = {}
    biases: dict[str, np.ndarray] = {}
    input_scales: dict[str, float] = {}
    for node in folded.nodes:
        if node.op not in ("conv", "upconv"):
            continue
        kname, bname = node.params
        kshape = folded.param_shapes[kname]
        fan_in = kshape[0] * kshape[1] * kshape[2]
        if fan_in > MAX_CONV_FAN_IN:
            raise NumericError(
                f"{node.name}: fan-in {fan_in} exceeds the int32-safe bound "
                f"{MAX_CONV_FAN_IN}"
            )
        kq, s_w = quantize_kernel(wfold.tensors[kname])
        s_in = carried[node.inputs[0]].scale
        kernels[kname] = kq
        scales[kname] = s_w
        biases[bname] = quantize_bias(wfold.tensors[bname], s_in, s_w)
        input_scales[node.name] = s_in
    return QuantWeightSet(
        spec_string=graph.spec.spec_string,
        kernels=kernels,
        kernel_scales=scales,
        biases=biases,
        act_qp=dict(act_qp),
        input_scales=input_scales,
        provenance=provenance,
    )


def quantize_model(
    graph: Graph, weights: WeightSet, calib_images, provenance: str = ""
) -> QuantWeightSet:
    """calibrate + quantize_weights in one step."""
    act_qp = calibrate(graph, weights, calib_images)
    return quantize_weights(graph, weights, act_qp, provenance)


def rebind_input_scales(graph: Graph, qws: QuantWeightSet) -> None:
    """Recompute input_scales after deserialization."""
    folded = fold_graph_structure(graph)
    carried = propagate_qparams(folded, qws.act_qp)
    qws.input_scales = {
        n.name: carried[n.inputs[0]].scale
        for n in folded.nodes
        if n.op in ("conv", "upconv")
    }
