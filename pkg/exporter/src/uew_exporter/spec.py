"""Architecture strings and the parameter plan they imply.

A model identifier reads "L/F/Y|N/IR": encoder depth (levels), base filter
count, whether conv blocks carry batch norm, and the per-level filter
growth ratio. Stage l of the contracting path uses floor(F * IR**l + 0.5)
filters; the expanding path mirrors it. The plan produced here fixes the
UEW entry names, shapes and order that an export must deliver, without
consulting any runtime.
"""

import math
from dataclasses import dataclass

from .errors import SpecError


@dataclass(frozen=True)
class ModelSpec:
    levels: int
    base_filters: int
    use_norm: bool
    growth: float
    text: str


def parse_spec(text):
    """Parse "L/F/Y|N/IR" into a ModelSpec, validating every field."""
    parts = text.strip().split("/")
    if len(parts) != 4:
        raise SpecError(f"spec string must have 4 '/'-separated fields: {text!r}")
    try:
        levels = int(parts[0])
        base = int(parts[1])
        growth = float(parts[3])
    except ValueError as exc:
        raise SpecError(f"unparsable spec string {text!r}: {exc}") from None
    flag = parts[2].strip().upper()
    if flag not in ("Y", "N"):
        raise SpecError(f"norm flag must be Y or N, got {parts[2]!r}")
    if levels < 2:
        raise SpecError(f"need at least 2 levels, got {levels}")
    if base < 1:
        raise SpecError(f"base filter count must be positive, got {base}")
    if not math.isfinite(growth) or growth <= 0:
        raise SpecError(f"growth ratio must be a positive finite number, got {growth}")
    return ModelSpec(levels, base, flag == "Y", growth, text.strip())


def channel_widths(spec):
    """Filter count per level: floor(F * IR**l + 0.5)."""
    return [
        int(math.floor(spec.base_filters * spec.growth**l + 0.5))
        for l in range(spec.levels)
    ]


@dataclass(frozen=True)
class PlanEntry:
    """One tensor the exported file must contain, in file order."""

    name: str  # UEW entry name, e.g. "enc0_conv1.kernel"
    layer: str  # Keras layer expected to supply it
    kind: str  # "conv", "upconv" or "norm"
    shape: tuple
    trainable: bool


def entry_plan(spec, input_channels=3):
    """Ordered tensor plan for a spec.

    Convolution kernels are planned as (kh, kw, c_in, c_out) — including
    the 2x2 transposed convolutions, whose Keras variables are laid out
    differently and need a transpose on the way out. Norm entries appear
    as mean, var, gamma, beta per layer; the running statistics are not
    trainable.
    """
    widths = channel_widths(spec)
    plan = []

    def conv(layer, c_in, c_out, k, kind):
        plan.append(PlanEntry(f"{layer}.kernel", layer, kind, (k, k, c_in, c_out), True))
        plan.append(PlanEntry(f"{layer}.bias", layer, kind, (c_out,), True))

    def norm(layer, c):
        for pname, trainable in (
            ("mean", False),
            ("var", False),
            ("gamma", True),
            ("beta", True),
        ):
            plan.append(PlanEntry(f"{layer}.{pname}", layer, "norm", (c,), trainable))

    def block(prefix, c_in, c_out):
        for i in (1, 2):
            conv(f"{prefix}_conv{i}", c_in if i == 1 else c_out, c_out, 3, "conv")
            if spec.use_norm:
                norm(f"{prefix}_norm{i}", c_out)

    c_prev = input_channels
    for l in range(spec.levels - 1):
        block(f"enc{l}", c_prev, widths[l])
        c_prev = widths[l]
    block("bott", c_prev, widths[-1])
    c_prev = widths[-1]
    for l in range(spec.levels - 2, -1, -1):
        conv(f"dec{l}_up", c_prev, widths[l], 2, "upconv")
        block(f"dec{l}", 2 * widths[l], widths[l])
        c_prev = widths[l]
    conv("head", widths[0], 1, 1, "conv")
    return plan


def trainable_scalars(spec, input_channels=3):
    """Trainable parameter count implied by the plan."""
    return sum(
        math.prod(e.shape) for e in entry_plan(spec, input_channels) if e.trainable
    )
