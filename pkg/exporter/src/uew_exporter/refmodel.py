"""Reference Keras implementation of the exported architecture family.

Used to rebuild a model around a bare .weights.h5 checkpoint, and by the
tests as the canonical layer-name/shape source. Layer names follow the
deterministic scheme the UEW entry names are derived from.
"""

import keras
from keras import layers

from .errors import SpecError
from .spec import ModelSpec, channel_widths, parse_spec


def build_reference_model(spec, input_size=(128, 128, 3)):
    if not isinstance(spec, ModelSpec):
        spec = parse_spec(spec)
    h, w, c = input_size
    down = 2 ** (spec.levels - 1)
    if h % down or w % down:
        raise SpecError(
            f"input {h}x{w} not divisible by {down} (levels={spec.levels})"
        )
    widths = channel_widths(spec)

    def block(x, filters, prefix):
        for i in (1, 2):
            x = layers.Conv2D(filters, 3, padding="same", name=f"{prefix}_conv{i}")(x)
            if spec.use_norm:
                x = layers.BatchNormalization(name=f"{prefix}_norm{i}")(x)
            x = layers.ReLU(name=f"{prefix}_relu{i}")(x)
        return x

    inp = keras.Input(shape=(h, w, c), name="input")
    x = inp
    skips = []
    for l in range(spec.levels - 1):
        x = block(x, widths[l], f"enc{l}")
        skips.append(x)
        x = layers.MaxPooling2D(2, name=f"enc{l}_pool")(x)
    x = block(x, widths[-1], "bott")
    for l in range(spec.levels - 2, -1, -1):
        x = layers.Conv2DTranspose(
            widths[l], 2, strides=2, padding="valid", name=f"dec{l}_up"
        )(x)
        # Skip connection first, fresh upsampled features second.
        x = layers.Concatenate(name=f"dec{l}_concat")([skips[l], x])
        x = block(x, widths[l], f"dec{l}")
    x = layers.Conv2D(1, 1, name="head")(x)
    out = layers.Activation("sigmoid", name="head_sigmoid")(x)
    name = "unet_" + spec.text.replace("/", "_").replace(".", "p")
    return keras.Model(inp, out, name=name)
