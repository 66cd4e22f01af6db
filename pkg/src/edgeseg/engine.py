"""Graph execution: float32 reference path and int8 quantized path.

Both paths take one image at a time; a dataset of N images is N
independent calls, so batching can never change results. The float path
runs the graph as built. The quantized path runs the batchnorm-folded
graph (norm layers are absorbed into the preceding convolution before
quantization) and carries QuantTensors between nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops, qops
from .builder import Graph, Node, fused_relu_targets
from .errors import BindingError, CalibrationError, NumericError, ShapeError, SpecError


@dataclass
class WeightSet:
    """Named float32 parameter tensors for one graph."""

    tensors: dict[str, np.ndarray]
    spec_string: str = ""
    provenance: str = ""

    @property
    def total_scalars(self) -> int:
        return sum(int(t.size) for t in self.tensors.values())

    @property
    def trainable_count(self) -> int:
        from .builder import is_trainable

        return sum(int(t.size) for n, t in self.tensors.items() if is_trainable(n))


def generate_random_weights(graph: Graph, seed: int) -> WeightSet:
    """He-initialized kernels, zero biases, unit-variance norm stats."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in graph.param_shapes.items():
        if name.endswith(".kernel"):
            fan_in = shape[0] * shape[1] * shape[2]
            std = np.sqrt(2.0 / max(1, fan_in))
            tensors[name] = rng.normal(0.0, std, shape).astype(np.float32)
        elif name.endswith(".bias") or name.endswith(".mean") or name.endswith(".beta"):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        elif name.endswith(".var") or name.endswith(".gamma"):
            tensors[name] = np.ones(shape, dtype=np.float32)
        else:  # pragma: no cover - builder never emits other names
            raise BindingError(f"unknown parameter kind: {name}")
    return WeightSet(tensors, graph.spec.spec_string, f"random init, seed {seed}")


def bind_weights(graph: Graph, weights: WeightSet) -> None:
    """Check that a weight set matches the graph exactly."""
    missing = [n for n in graph.param_shapes if n not in weights.tensors]
    if missing:
        raise BindingError(f"missing parameters: {', '.join(sorted(missing))}")
    extra = [n for n in weights.tensors if n not in graph.param_shapes]
    if extra:
        raise BindingError(f"unexpected parameters: {', '.join(sorted(extra))}")
    for name, shape in graph.param_shapes.items():
        t = weights.tensors[name]
        if tuple(t.shape) != shape:
            raise BindingError(
                f"parameter {name} has shape {tuple(t.shape)}, expected {shape}"
            )
        if t.dtype != np.float32:
            raise BindingError(f"parameter {name} must be float32, got {t.dtype}")


def _as_batch(image: np.ndarray, spec) -> np.ndarray:
    if not isinstance(image, np.ndarray):
        raise ShapeError(f"image must be a numpy array, got {type(image).__name__}")
    if image.ndim == 3:
        image = image[None]
    if image.ndim != 4 or image.shape[0] != 1:
        raise ShapeError(f"expected one (h, w, c) image, got shape {image.shape}")
    h, w, c = spec.input_size
    if image.shape[1:] != (h, w, c):
        raise ShapeError(
            f"image shape {image.shape[1:]} does not match model input {(h, w, c)}"
        )
    if image.dtype != np.float32:
        image = image.astype(np.float32)
    if not np.isfinite(image).all():
        raise NumericError("image contains non-finite values")
    if image.min() < 0.0 or image.max() > 1.0:
        raise NumericError("image values must lie in [0, 1]")
    return image


def run_float(
    graph: Graph,
    weights: WeightSet,
    image: np.ndarray,
    collect: dict[str, np.ndarray] | None = None,
) -> np.ndarray:
    """Float32 forward pass; returns the (H, W, 1) probability map.

    When `collect` is a dict it receives every node's output tensor
    (including the input), which calibration uses to observe ranges.
    """
    bind_weights(graph, weights)
    x = _as_batch(image, graph.spec)
    acts: dict[str, np.ndarray] = {"input": x}
    if collect is not None:
        collect["input"] = x
    for node in graph.nodes:
        if node.op == "input":
            continue
        y = _run_float_node(node, acts, weights)
        acts[node.name] = y
        if collect is not None:
            collect[node.name] = y
    out = acts[graph.output_name]
    return out.reshape(out.shape[1], out.shape[2], out.shape[3])


def _run_float_node(node: Node, acts, weights: WeightSet) -> np.ndarray:
    a = acts[node.inputs[0]]
    t = weights.tensors
    if node.op == "conv":
        p = ops.ConvParams(t[node.params[0]], t[node.params[1]])
        return ops.conv2d(a, p)
    if node.op == "norm":
        mean, var, gamma, beta = (t[p] for p in node.params)
        return ops.batchnorm_infer(a, mean, var, gamma, beta, eps=0.0)
    if node.op == "relu":
        return ops.relu(a)
    if node.op == "maxpool":
        return ops.maxpool2(a)
    if node.op == "upconv":
        p = ops.ConvParams(t[node.params[0]], t[node.params[1]])
        return ops.upconv2(a, p)
    if node.op == "concat":
        return ops.concat_channels(a, acts[node.inputs[1]])
    if node.op == "sigmoid":
        return ops.sigmoid(a)
    raise SpecError(f"unknown op {node.op!r}")  # pragma: no cover


def fold_graph_structure(graph: Graph) -> Graph:
    """Drop norm nodes, rewiring consumers to the preceding conv."""
    if not any(n.op == "norm" for n in graph.nodes):
        return graph
    remap: dict[str, str] = {}
    nodes: list[Node] = []
    shapes = dict(graph.param_shapes)
    for node in graph.nodes:
        if node.op == "norm":
            parent = node.inputs[0]
            if graph.node(parent).op != "conv":
                raise SpecError(
                    f"cannot fold norm {node.name}: parent {parent} is not a conv"
                )
            remap[node.name] = remap.get(parent, parent)
            for p in node.params:
                shapes.pop(p)
            continue
        inputs = tuple(remap.get(i, i) for i in node.inputs)
        nodes.append(Node(node.name, node.op, inputs, node.params))
    return Graph(tuple(nodes), graph.input_name, graph.output_name, graph.spec, shapes)


def fold_batchnorm(graph: Graph, weights: WeightSet) -> tuple[Graph, WeightSet]:
    """Fold norm layers into the preceding convolutions.

    The stored variance is treated as already containing the training-time
    epsilon, so folding uses 1/sqrt(var) directly.
    """
    bind_weights(graph, weights)
    folded = fold_graph_structure(graph)
    if folded is graph:
        return graph, weights
    tensors: dict[str, np.ndarray] = {}
    norm_of: dict[str, Node] = {}
    for node in graph.nodes:
        if node.op == "norm":
            norm_of[node.inputs[0]] = node
    for node in graph.nodes:
        if node.op == "norm":
            continue
        for pname in node.params:
            tensors[pname] = weights.tensors[pname]
        if node.op == "conv" and node.name in norm_of:
            norm = norm_of[node.name]
            mean, var, gamma, beta = (
                weights.tensors[p].astype(np.float64) for p in norm.params
            )
            inv = gamma / np.sqrt(var)
            k = weights.tensors[node.params[0]].astype(np.float64)
            b = weights.tensors[node.params[1]].astype(np.float64)
            tensors[node.params[0]] = (k * inv).astype(np.float32)
            tensors[node.params[1]] = ((b - mean) * inv + beta).astype(np.float32)
    ws = WeightSet(tensors, weights.spec_string, weights.provenance)
    bind_weights(folded, ws)
    return folded, ws


def run_quant(graph: Graph, qweights, image: np.ndarray) -> np.ndarray:
    """int8 forward pass; returns the dequantized (H, W, 1) map in [0, 1].

    `qweights` is a quantize.QuantWeightSet. Convolution outputs feeding a
    relu are requantized directly to the relu's calibrated range, which
    makes the relu's clamp-at-zero-point exact.
    """
    folded = fold_graph_structure(graph)
    x = _as_batch(image, graph.spec)
    act_qp = qweights.act_qp

    def qp_of(name: str) -> qops.QuantParams:
        try:
            return act_qp[name]
        except KeyError:
            raise CalibrationError(
                f"no calibration entry for tensor {name!r}"
            ) from None

    fused = fused_relu_targets(folded)
    acts: dict[str, qops.QuantTensor] = {
        "input": qops.QuantTensor(qops.quantize_array(x, qp_of("input")), qp_of("input"))
    }
    for node in folded.nodes:
        if node.op == "input":
            continue
        a = acts[node.inputs[0]]
        if node.op in ("conv", "upconv"):
            kernel_q = qweights.kernels[node.params[0]]
            w_scale = qweights.kernel_scales[node.params[0]]
            bias_q = qweights.biases[node.params[1]]
            baked = qweights.input_scales[node.name]
            if a.qp.scale != baked:
                raise CalibrationError(
                    f"input scale for {node.name} drifted from its calibrated value"
                )
            out_qp = qp_of(fused.get(node.name, node.name))
            if node.op == "conv":
                y = qops.qconv2d(a, kernel_q, w_scale, bias_q, out_qp)
            else:
                y = qops.qupconv2(a, kernel_q, w_scale, bias_q, out_qp)
        elif node.op == "relu":
            y = qops.qrelu(a)
        elif node.op == "maxpool":
            y = qops.qmaxpool2(a)
        elif node.op == "concat":
            y = qops.qconcat(a, acts[node.inputs[1]], qp_of(node.name))
        elif node.op == "sigmoid":
            y = qops.qsigmoid(a, qp_of(node.name))
        else:  # pragma: no cover
            raise SpecError(f"unknown op {node.op!r}")
        acts[node.name] = y
    out = acts[folded.output_name]
    deq = out.dequantize()
    return deq.reshape(deq.shape[1], deq.shape[2], deq.shape[3])


def predict_mask(prob: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Threshold a probability map into a {0, 1} uint8 mask."""
    if not (0.0 < threshold < 1.0):
        raise SpecError(f"threshold must lie strictly inside (0, 1): {threshold!r}")
    p = np.asarray(prob)
    if p.ndim == 3 and p.shape[2] == 1:
        p = p[:, :, 0]
    if p.ndim != 2:
        raise ShapeError(f"probability map must be (h, w) or (h, w, 1): {p.shape}")
    return (p > threshold).astype(np.uint8)


@dataclass
class FloatRunner:
    """Callable image -> probability map over the float path."""

    graph: Graph
    weights: WeightSet
    backend: str = field(default="float", init=False)

    def __call__(self, image: np.ndarray) -> np.ndarray:
        return run_float(self.graph, self.weights, image)


@dataclass
class QuantRunner:
    """Callable image -> probability map over the int8 path."""

    graph: Graph
    qweights: object
    backend: str = field(default="quant", init=False)

    def __call__(self, image: np.ndarray) -> np.ndarray:
        return run_quant(self.graph, self.qweights, image)
