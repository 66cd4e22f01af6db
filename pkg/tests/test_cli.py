import json
from pathlib import Path

import numpy as np
import pytest

from edgeseg.cli import main
from edgeseg.metrics import classify_cdr
from edgeseg.model_io import read_pgm_mask, read_ppm

DATA = Path(__file__).parent / "data"


@pytest.mark.parametrize(
    "name,argv",
    [
        ("main", ["--help"]),
        ("synth", ["synth", "--help"]),
        ("init", ["init", "--help"]),
        ("quantize", ["quantize", "--help"]),
        ("infer", ["infer", "--help"]),
        ("bench", ["bench", "--help"]),
        ("plan", ["plan", "--help"]),
        ("metrics", ["metrics", "--help"]),
        ("params", ["params", "--help"]),
    ],
)
def test_help_matches_golden(name, argv, capsys, monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
    assert capsys.readouterr().out == (DATA / f"help_{name}.txt").read_text()


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["init", "--out", "x.uew"])  # neither --spec nor --preset
    assert exc.value.code == 2


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth -> init -> quantize once; individual tests poke at the files."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert main(["synth", "--out", str(data), "--count", "5", "--base", "3",
                 "--seed", "11"]) == 0
    model = root / "float.uew"
    assert main(["init", "--spec", "3/4/Y/1.1", "--out", str(model),
                 "--seed", "2"]) == 0
    qmodel = root / "quant.uew"
    assert main(["quantize", "--model", str(model), "--calib", str(data),
                 "--limit", "3", "--out", str(qmodel)]) == 0
    return root, data, model, qmodel


def test_synth_writes_consistent_dataset(pipeline):
    _, data, _, _ = pipeline
    manifest = json.loads((data / "manifest.json").read_text())
    assert len(manifest["samples"]) == 5
    splits = [s["split"] for s in manifest["samples"]]
    assert splits.count("train") == 4 and splits.count("test") == 1
    for rec in manifest["samples"]:
        img = read_ppm(data / rec["image"])
        cup = read_pgm_mask(data / rec["cup"])
        disc = read_pgm_mask(data / rec["disc"])
        assert img.shape == (128, 128, 3)
        assert not (cup & ~disc).any()
        assert 0.0 < rec["cdr"] < 1.0
        assert rec["laterality"] in ("left", "right")


def test_infer_both_backends_and_determinism(pipeline, tmp_path, capsys):
    root, data, model, qmodel = pipeline
    img = str(data / "img_00000.ppm")
    out_f = tmp_path / "f.pgm"
    out_q = tmp_path / "q.pgm"
    assert main(["infer", "--model", str(model), "--image", img,
                 "--out", str(out_f)]) == 0
    assert main(["infer", "--model", str(qmodel), "--image", img,
                 "--out", str(out_q), "--quant"]) == 0
    capsys.readouterr()
    mf = read_pgm_mask(out_f)
    mq = read_pgm_mask(out_q)
    assert mf.shape == mq.shape == (128, 128)
    out_f2 = tmp_path / "f2.pgm"
    assert main(["infer", "--model", str(model), "--image", img,
                 "--out", str(out_f2)]) == 0
    assert out_f2.read_bytes() == out_f.read_bytes()


def test_infer_backend_mismatch_exits_3(pipeline, tmp_path, capsys):
    _, data, model, qmodel = pipeline
    img = str(data / "img_00000.ppm")
    code = main(["infer", "--model", str(model), "--image", img,
                 "--out", str(tmp_path / "x.pgm"), "--quant"])
    err = capsys.readouterr().err
    assert code == 3 and err.startswith("error: DataFormatError:")
    code = main(["infer", "--model", str(qmodel), "--image", img,
                 "--out", str(tmp_path / "x.pgm")])
    assert code == 3


def test_metrics_command_output(pipeline, capsys):
    _, data, _, _ = pipeline
    manifest = json.loads((data / "manifest.json").read_text())
    rec = manifest["samples"][0]
    code = main(["metrics", "--cup", str(data / rec["cup"]),
                 "--disc", str(data / rec["disc"]),
                 "--laterality", rec["laterality"],
                 "--ref-cup", str(data / rec["cup"]),
                 "--ref-disc", str(data / rec["disc"])])
    out = capsys.readouterr().out
    assert code == 0
    assert f"vertical cup/disc ratio: {rec['cdr']:.4f}" in out
    assert "ISNT ordering: satisfied" in out
    assert "dice cup: 1.0000" in out

    code = main(["metrics", "--cup", str(data / rec["cup"]),
                 "--disc", str(data / rec["disc"]),
                 "--ref-cup", str(data / rec["cup"])])
    assert code == 3


def test_bench_command_and_comparison(pipeline, tmp_path, capsys):
    root, data, model, qmodel = pipeline
    rep_f = tmp_path / "float.json"
    assert main(["bench", "--model", str(model), "--data", str(data),
                 "--reps", "1", "--limit", "2", "--out", str(rep_f)]) == 0
    out = capsys.readouterr().out
    assert "backend: float" in out and "single repetition" in out
    assert main(["bench", "--model", str(qmodel), "--data", str(data),
                 "--quant", "--reps", "2", "--limit", "2",
                 "--baseline", str(rep_f)]) == 0
    out = capsys.readouterr().out
    assert "backend: quant" in out and "speedup:" in out
    report = json.loads(rep_f.read_text())
    assert report["backend"] == "float" and report["repetitions"] == 1


def test_plan_command_frozen_output(capsys):
    assert main(["plan", "--n", "200", "--transfer", "1000",
                 "--edge", "8.73", "--cloud", "7.71"]) == 0
    out = capsys.readouterr().out
    assert "break-even batch size: 980" in out
    assert "recommended target: edge" in out
    assert main(["plan", "--n", "10", "--transfer", "50",
                 "--edge", "5.0", "--cloud", "9.0"]) == 0
    out = capsys.readouterr().out
    assert "none (device wins at every batch size)" in out


def test_plan_numeric_error_exits_4(capsys):
    code = main(["plan", "--n", "10", "--transfer", "50",
                 "--edge", "5.0", "--cloud", "0.0"])
    err = capsys.readouterr().err
    assert code == 4 and err.startswith("error: NumericError:")


def test_params_command(capsys):
    assert main(["params", "--preset", "disc"]) == 0
    out = capsys.readouterr().out
    assert "total: 651368 (0.651368 million trainable parameters)" in out
    assert "enc0_conv1" in out
    code = main(["params", "--spec", "6/64/Z/1.1"])
    assert code == 3


def test_quantize_requires_calibration_images(pipeline, tmp_path, capsys):
    _, _, model, _ = pipeline
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["quantize", "--model", str(model), "--calib", str(empty),
                 "--out", str(tmp_path / "q.uew")])
    err = capsys.readouterr().err
    assert code == 3 and "no .ppm images" in err


def test_quantize_records_calibration_identity(pipeline, capsys):
    from edgeseg.model_io import load_quant_weights

    _, data, _, qmodel = pipeline
    capsys.readouterr()
    _, qws = load_quant_weights(qmodel)
    assert "calibrated on 3 images" in qws.provenance
    assert "img_00000.ppm" in qws.provenance
    assert "img_00002.ppm" in qws.provenance


def test_mixed_style_covers_both_bands(tmp_path):
    out = tmp_path / "mix"
    assert main(["synth", "--out", str(out), "--count", "4", "--seed", "3",
                 "--style", "mixed"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    labels = {classify_cdr(s["cdr"]) for s in manifest["samples"]}
    assert "healthy_range" in labels and "glaucoma_range" in labels
