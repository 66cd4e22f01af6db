"""Cross-checks against the runtime that consumes these files.

The exporter itself never imports the runtime; these tests do, using it
as the reference reader/executor for the container format.
"""

import numpy as np

import edgeseg
from conftest import SMALL_SIZE, SMALL_SPEC, randomize_weights
from uew_exporter import build_reference_model, entry_plan, export_model, parse_file_bytes, parse_spec


def test_runtime_output_matches_keras(small_setup):
    ws = edgeseg.load_float_weights(small_setup.uew_path, input_size=SMALL_SIZE)
    graph = edgeseg.build_graph(
        edgeseg.parse_spec_string(SMALL_SPEC, input_size=SMALL_SIZE)
    )
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(10):
        img = rng.uniform(0, 1, SMALL_SIZE).astype(np.float32)
        ours = edgeseg.run_float(graph, ws, img)
        theirs = small_setup.model.predict(img[None], verbose=0)[0]
        assert np.ptp(theirs) > 1e-3  # outputs must actually vary
        worst = max(worst, float(np.abs(ours - theirs).mean()))
    assert worst < 1e-4


def test_runtime_output_matches_keras_without_norm(tmp_path):
    model = build_reference_model("2/4/N/1.0", SMALL_SIZE)
    randomize_weights(model, np.random.default_rng(9))
    out = tmp_path / "plain.uew"
    export_model(model, "2/4/N/1.0", out, source="plain")
    ws = edgeseg.load_float_weights(out, input_size=SMALL_SIZE)
    graph = edgeseg.build_graph(
        edgeseg.parse_spec_string("2/4/N/1.0", input_size=SMALL_SIZE)
    )
    rng = np.random.default_rng(10)
    for _ in range(3):
        img = rng.uniform(0, 1, SMALL_SIZE).astype(np.float32)
        ours = edgeseg.run_float(graph, ws, img)
        theirs = model.predict(img[None], verbose=0)[0]
        assert float(np.abs(ours - theirs).mean()) < 1e-4


def test_runtime_resave_is_byte_identical(small_setup, tmp_path):
    ws = edgeseg.load_float_weights(small_setup.uew_path, input_size=SMALL_SIZE)
    resaved = tmp_path / "resaved.uew"
    edgeseg.save_float_weights(resaved, ws)
    assert resaved.read_bytes() == small_setup.uew_path.read_bytes()


def test_runtime_written_file_matches_plan(tmp_path):
    text = "3/6/Y/1.1"
    size = (32, 32, 3)
    graph = edgeseg.build_graph(edgeseg.parse_spec_string(text, input_size=size))
    ws = edgeseg.generate_random_weights(graph, seed=3)
    path = tmp_path / "runtime.uew"
    edgeseg.save_float_weights(path, ws)

    spec_text, quantized, entries = parse_file_bytes(path.read_bytes())
    assert spec_text == text
    assert quantized is False
    plan = entry_plan(parse_spec(text), input_channels=3)
    assert list(entries) == [e.name for e in plan] + ["__provenance__"]
    for e in plan:
        assert tuple(entries[e.name][0].shape) == e.shape
