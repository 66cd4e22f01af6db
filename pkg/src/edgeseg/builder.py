"""Generalized U-Net construction.

A model family member is identified by the compact string "L/F/Y|N/IR":
number of levels L (encoder stages plus bottleneck), first-stage filter
count F, whether conv blocks carry batch normalization (Y/N), and the
level-to-level filter increment ratio IR. Stage widths grow geometrically
and are rounded half-up, so e.g. 6/64/Y/1.1 uses widths
[64, 70, 77, 85, 94, 103].

Blocks:
  encoder level l (0..L-2):  [conv3x3 -> (norm) -> relu] x2 -> maxpool2
  bottleneck (level L-1):    [conv3x3 -> (norm) -> relu] x2
  decoder level l (L-2..0):  upconv2 -> concat(encoder skip first) ->
                             [conv3x3 -> (norm) -> relu] x2
  head:                      conv1x1 -> sigmoid

Dropout is an identity at inference time and is never emitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import SpecError

# Named model configurations for the bundled segmentation tasks. Values
# are (levels, base_filters, increment_ratio, use_norm, input h, w, c).
PRESETS = {
    "disc": (6, 40, 1.1, True, 128, 128, 3),
    "cup": (6, 64, 1.1, True, 128, 128, 3),
    "thyroid_simple": (6, 40, 1.1, True, 128, 128, 3),
    "thyroid_complex": (6, 64, 1.1, True, 128, 128, 3),
}


def round_half_up(x: float) -> int:
    """Round to nearest integer, ties away from zero toward +inf."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ModelSpec:
    levels: int
    base_filters: int
    increment_ratio: float
    use_norm: bool = True
    input_size: tuple[int, int, int] = (128, 128, 3)

    def __post_init__(self):
        if not isinstance(self.levels, int) or self.levels < 2:
            raise SpecError(f"levels must be an integer >= 2, got {self.levels!r}")
        if not isinstance(self.base_filters, int) or self.base_filters < 1:
            raise SpecError(
                f"base_filters must be a positive integer, got {self.base_filters!r}"
            )
        if not (self.increment_ratio >= 1.0 and math.isfinite(self.increment_ratio)):
            raise SpecError(
                f"increment_ratio must be finite and >= 1.0, got {self.increment_ratio!r}"
            )
        h, w, c = self.input_size
        if h < 1 or w < 1 or c < 1:
            raise SpecError(f"input_size must be positive, got {self.input_size}")
        factor = 2 ** (self.levels - 1)
        if h % factor or w % factor:
            raise SpecError(
                f"input {h}x{w} not divisible by 2^(levels-1) = {factor}"
            )

    @property
    def spec_string(self) -> str:
        ir = self.increment_ratio
        ir_text = f"{ir:.1f}" if ir == int(ir) else f"{ir:g}"
        return (
            f"{self.levels}/{self.base_filters}/"
            f"{'Y' if self.use_norm else 'N'}/{ir_text}"
        )


def parse_spec_string(text: str, input_size=(128, 128, 3)) -> ModelSpec:
    """Parse "L/F/Y|N/IR" (e.g. "6/64/Y/1.1") into a ModelSpec."""
    parts = text.strip().split("/")
    if len(parts) != 4:
        raise SpecError(f"spec string must have 4 '/'-separated fields: {text!r}")
    try:
        levels = int(parts[0])
        filters = int(parts[1])
        ratio = float(parts[3])
    except ValueError as exc:
        raise SpecError(f"unparseable spec string {text!r}: {exc}") from None
    if parts[2] not in ("Y", "N"):
        raise SpecError(f"norm flag must be 'Y' or 'N', got {parts[2]!r}")
    return ModelSpec(levels, filters, ratio, parts[2] == "Y", tuple(input_size))


def preset(name: str) -> ModelSpec:
    """Look up a named preset configuration."""
    try:
        levels, filters, ratio, norm, h, w, c = PRESETS[name]
    except KeyError:
        raise SpecError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
    return ModelSpec(levels, filters, ratio, norm, (h, w, c))


def channel_widths(spec: ModelSpec) -> list[int]:
    """Per-level filter counts: round_half_up(F * IR**l) for l in 0..L-1."""
    return [
        round_half_up(spec.base_filters * spec.increment_ratio**l)
        for l in range(spec.levels)
    ]


@dataclass(frozen=True)
class Node:
    """One operation in the inference graph.

    op is one of: input, conv, norm, relu, maxpool, upconv, concat, sigmoid.
    params holds the names of the node's weight tensors, in a fixed order
    (kernel, bias) for convs and (mean, var, gamma, beta) for norms.
    """

    name: str
    op: str
    inputs: tuple[str, ...] = ()
    params: tuple[str, ...] = ()


@dataclass(frozen=True)
class Graph:
    nodes: tuple[Node, ...]
    input_name: str
    output_name: str
    spec: ModelSpec
    param_shapes: dict[str, tuple[int, ...]] = field(compare=False)

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise SpecError("graph node names must be unique")

    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def consumers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n.name: [] for n in self.nodes}
        for n in self.nodes:
            for src in n.inputs:
                out[src].append(n.name)
        return out

    def layer_names(self) -> list[str]:
        """Structural layers: everything except input and activations."""
        return [
            n.name for n in self.nodes if n.op not in ("input", "relu", "sigmoid")
        ]


def fused_relu_targets(graph: Graph) -> dict[str, str]:
    """Map conv/upconv nodes to a relu that is their sole consumer.

    The quantized path requantizes such conv outputs directly to the
    relu's calibrated range, which makes the relu clamp exact.
    """
    consumers = graph.consumers()
    out: dict[str, str] = {}
    by_name = {n.name: n for n in graph.nodes}
    for node in graph.nodes:
        if node.op in ("conv", "upconv"):
            outs = consumers[node.name]
            if len(outs) == 1 and by_name[outs[0]].op == "relu":
                out[node.name] = outs[0]
    return out


def build_graph(spec: ModelSpec) -> Graph:
    """Emit the inference graph for a spec, with deterministic names."""
    widths = channel_widths(spec)
    nodes: list[Node] = [Node("input", "input")]
    shapes: dict[str, tuple[int, ...]] = {}

    def conv_block(layer: str, c_in: int, c_out: int, prev: str) -> str:
        shapes[f"{layer}.kernel"] = (3, 3, c_in, c_out)
        shapes[f"{layer}.bias"] = (c_out,)
        nodes.append(
            Node(layer, "conv", (prev,), (f"{layer}.kernel", f"{layer}.bias"))
        )
        prev = layer
        if spec.use_norm:
            norm = layer.replace("conv", "norm")
            pnames = tuple(f"{norm}.{s}" for s in ("mean", "var", "gamma", "beta"))
            for pn in pnames:
                shapes[pn] = (c_out,)
            nodes.append(Node(norm, "norm", (prev,), pnames))
            prev = norm
        act = layer.replace("conv", "relu")
        nodes.append(Node(act, "relu", (prev,)))
        return act

    prev = "input"
    c_prev = spec.input_size[2]
    skips: list[str] = []
    for l in range(spec.levels - 1):
        prev = conv_block(f"enc{l}_conv1", c_prev, widths[l], prev)
        prev = conv_block(f"enc{l}_conv2", widths[l], widths[l], prev)
        skips.append(prev)
        nodes.append(Node(f"enc{l}_pool", "maxpool", (prev,)))
        prev = f"enc{l}_pool"
        c_prev = widths[l]

    prev = conv_block("bott_conv1", c_prev, widths[-1], prev)
    prev = conv_block("bott_conv2", widths[-1], widths[-1], prev)
    c_prev = widths[-1]

    for l in range(spec.levels - 2, -1, -1):
        up = f"dec{l}_up"
        shapes[f"{up}.kernel"] = (2, 2, c_prev, widths[l])
        shapes[f"{up}.bias"] = (widths[l],)
        nodes.append(Node(up, "upconv", (prev,), (f"{up}.kernel", f"{up}.bias")))
        cat = f"dec{l}_concat"
        nodes.append(Node(cat, "concat", (skips[l], up)))  # encoder features first
        prev = conv_block(f"dec{l}_conv1", 2 * widths[l], widths[l], cat)
        prev = conv_block(f"dec{l}_conv2", widths[l], widths[l], prev)
        c_prev = widths[l]

    shapes["head.kernel"] = (1, 1, widths[0], 1)
    shapes["head.bias"] = (1,)
    nodes.append(Node("head", "conv", (prev,), ("head.kernel", "head.bias")))
    nodes.append(Node("head_sigmoid", "sigmoid", ("head",)))

    return Graph(tuple(nodes), "input", "head_sigmoid", spec, shapes)


@dataclass(frozen=True)
class ParamCount:
    per_layer: dict[str, int] = field(compare=False)
    total: int = 0

    @property
    def mtp(self) -> float:
        """Total expressed in millions of trainable parameters."""
        return self.total / 1e6


# Norm running statistics (mean/var) are frozen buffers, not trainable.
NON_TRAINABLE_SUFFIXES = (".mean", ".var")


def is_trainable(param_name: str) -> bool:
    return not param_name.endswith(NON_TRAINABLE_SUFFIXES)


def count_params(spec: ModelSpec) -> ParamCount:
    """Trainable parameter count per layer, walking the emitted graph.

    Convolutions count kernel + bias scalars; norm layers count the two
    per-channel affine vectors (gamma, beta) and exclude running stats.
    """
    graph = build_graph(spec)
    per_layer: dict[str, int] = {}
    for node in graph.nodes:
        n = 0
        for pname in node.params:
            if is_trainable(pname):
                n += _prod(graph.param_shapes[pname])
        if node.params:
            per_layer[node.name] = n
    total = sum(per_layer.values())
    return ParamCount(per_layer, total)


def _prod(shape: tuple[int, ...]) -> int:
    out = 1
    for s in shape:
        out *= s
    return out
