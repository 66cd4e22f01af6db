import os

os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")

from types import SimpleNamespace

import numpy as np
import pytest
import keras

from uew_exporter import build_reference_model, export_file

SMALL_SPEC = "2/4/Y/1.0"
SMALL_SIZE = (16, 16, 3)


def randomize_weights(model, rng):
    """Give every layer non-trivial weights, batch-norm statistics included.

    Variances are drawn small on purpose: with var in [0.02, 0.2] the
    normalization epsilon contributes up to 5% of the denominator, so an
    export that forgot to fold it in would be loudly wrong downstream.
    """
    for layer in model.layers:
        ws = layer.get_weights()
        if not ws:
            continue
        if isinstance(layer, keras.layers.BatchNormalization):
            c = ws[0].shape
            layer.set_weights(
                [
                    rng.uniform(0.5, 1.5, c).astype(np.float32),  # gamma
                    rng.uniform(-0.5, 0.5, c).astype(np.float32),  # beta
                    rng.normal(0.0, 0.5, c).astype(np.float32),  # moving_mean
                    rng.uniform(0.02, 0.2, c).astype(np.float32),  # moving_var
                ]
            )
        else:
            kernel, bias = ws
            fan_in = int(np.prod(kernel.shape[:3]))
            layer.set_weights(
                [
                    rng.normal(0, np.sqrt(2 / fan_in), kernel.shape).astype(np.float32),
                    rng.uniform(-0.1, 0.1, bias.shape).astype(np.float32),
                ]
            )


@pytest.fixture(scope="session")
def small_setup(tmp_path_factory):
    """A randomized 2/4/Y/1.0 model saved to .keras and exported once."""
    workdir = tmp_path_factory.mktemp("export")
    model = build_reference_model(SMALL_SPEC, SMALL_SIZE)
    randomize_weights(model, np.random.default_rng(5))
    model_path = workdir / "m.keras"
    model.save(model_path)
    uew_path = workdir / "m.uew"
    emap = export_file(model_path, SMALL_SPEC, uew_path)
    return SimpleNamespace(
        workdir=workdir,
        model=model,
        model_path=model_path,
        uew_path=uew_path,
        emap=emap,
    )
