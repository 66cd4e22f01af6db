"""Command-line interface.

Exit codes: 0 success, 2 usage error (argparse), 3 any package error,
4 numeric-validity error. Failures print `error: <kind>: <message>`.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import datagen, metrics, planner
from .builder import PRESETS, build_graph, count_params, parse_spec_string, preset
from .engine import (
    FloatRunner,
    QuantRunner,
    generate_random_weights,
    predict_mask,
    run_float,
    run_quant,
)
from .errors import DataFormatError, EdgeSegError, NumericError
from .model_io import (
    load_float_weights,
    load_quant_weights,
    read_pgm_mask,
    read_ppm,
    save_float_weights,
    save_quant_weights,
    write_pgm_mask,
    write_ppm,
)
from .quantize import quantize_model


def _model_spec_args(sub):
    g = sub.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", help="model spec string, e.g. 6/40/Y/1.1")
    g.add_argument("--preset", choices=sorted(PRESETS), help="named model preset")


def _resolve_spec(args, input_size=(128, 128, 3)):
    if args.preset:
        return preset(args.preset)
    return parse_spec_string(args.spec, input_size=input_size)


def build_parser():
    p = argparse.ArgumentParser(
        prog="edgeseg",
        description="U-Net style cup/disc segmentation for edge devices: "
        "synthetic data, int8 quantization, latency and deployment tools.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("synth", help="generate a synthetic fundus dataset")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--count", type=int, required=True, help="total samples")
    s.add_argument("--base", type=int, default=None,
                   help="independent samples before augmentation (default: count)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=int, default=128, help="square image size")
    s.add_argument("--style", choices=["healthy", "glaucoma", "mixed"],
                   default="healthy")
    s.add_argument("--split", type=float, default=0.75,
                   help="training fraction recorded in the manifest")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("init", help="write randomly initialized float weights")
    _model_spec_args(s)
    s.add_argument("--out", required=True, help="output .uew path")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("quantize", help="calibrate and convert a model to int8")
    s.add_argument("--model", required=True, help="float .uew file")
    s.add_argument("--calib", required=True,
                   help="directory of .ppm calibration images")
    s.add_argument("--out", required=True, help="output quantized .uew path")
    s.add_argument("--limit", type=int, default=None,
                   help="use only the first N calibration images")
    s.set_defaults(func=cmd_quantize)

    s = sub.add_parser("infer", help="segment one image")
    s.add_argument("--model", required=True, help=".uew file")
    s.add_argument("--image", required=True, help="input .ppm")
    s.add_argument("--out", required=True, help="output mask .pgm")
    s.add_argument("--quant", action="store_true",
                   help="run the int8 backend (the file must be quantized)")
    s.add_argument("--threshold", type=float, default=0.5)
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("bench", help="measure per-image latency")
    s.add_argument("--model", required=True, help=".uew file")
    s.add_argument("--data", required=True, help="directory of .ppm images")
    s.add_argument("--quant", action="store_true")
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--limit", type=int, default=None)
    s.add_argument("--out", default=None, help="write the JSON report here")
    s.add_argument("--baseline", default=None,
                   help="earlier JSON report to compare against")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("plan", help="edge-vs-cloud deployment arithmetic")
    s.add_argument("--n", type=int, required=True, help="batch size (images)")
    s.add_argument("--transfer", type=float, required=True,
                   help="one-time upload cost, ms")
    s.add_argument("--edge", type=float, required=True, help="device ms per image")
    s.add_argument("--cloud", type=float, required=True, help="cloud ms per image")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("metrics", help="cup/disc measurements from mask files")
    s.add_argument("--cup", required=True, help="cup mask .pgm")
    s.add_argument("--disc", required=True, help="disc mask .pgm")
    s.add_argument("--laterality", choices=["left", "right"], default=None,
                   help="adds the rim-sector ISNT analysis")
    s.add_argument("--ref-cup", default=None, help="reference cup mask for Dice")
    s.add_argument("--ref-disc", default=None, help="reference disc mask for Dice")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("params", help="per-layer parameter counts for a spec")
    _model_spec_args(s)
    s.set_defaults(func=cmd_params)
    return p


def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = args.base if args.base is not None else args.count
    rng = np.random.default_rng(args.seed)
    counts = datagen.expand_counts(base, args.count)
    samples = []
    for idx, count in enumerate(counts):
        if args.style == "mixed":
            style = "healthy" if idx % 2 == 0 else "glaucoma"
        else:
            style = args.style
        s = datagen.synth_sample(None, size=args.size, style=style, rng=rng)
        samples.extend(datagen.augment_variants(s, count, args.seed, idx))

    n_train, _ = datagen.split_counts(len(samples), args.split)
    order = np.random.default_rng(args.seed + 1).permutation(len(samples))
    split = np.empty(len(samples), dtype=object)
    split[order[:n_train]] = "train"
    split[order[n_train:]] = "test"

    manifest = {
        "seed": args.seed,
        "size": args.size,
        "style": args.style,
        "count": args.count,
        "base": base,
        "split_fraction": args.split,
        "samples": [],
    }
    for i, s in enumerate(samples):
        names = {
            "image": f"img_{i:05d}.ppm",
            "cup": f"cup_{i:05d}.pgm",
            "disc": f"disc_{i:05d}.pgm",
        }
        write_ppm(out / names["image"], s.image)
        write_pgm_mask(out / names["cup"], s.cup)
        write_pgm_mask(out / names["disc"], s.disc)
        manifest["samples"].append(
            {**names, "cdr": s.cdr, "laterality": s.laterality,
             "split": str(split[i])}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    print(f"wrote {len(samples)} samples to {out} "
          f"({n_train} train / {len(samples) - n_train} test)")
    return 0


def cmd_init(args):
    spec = _resolve_spec(args)
    graph = build_graph(spec)
    ws = generate_random_weights(graph, seed=args.seed)
    save_float_weights(args.out, ws)
    total = count_params(spec).total
    print(f"wrote {args.out}: {spec.spec_string}, {total} trainable parameters")
    return 0


def _ppm_files(directory, limit=None):
    files = sorted(Path(directory).glob("*.ppm"))
    if limit is not None:
        files = files[:limit]
    if not files:
        raise DataFormatError(f"no .ppm images found in {directory}")
    return files


def cmd_quantize(args):
    files = _ppm_files(args.calib, args.limit)
    images = [read_ppm(f) for f in files]
    h, w, c = images[0].shape
    ws = load_float_weights(args.model, input_size=(h, w, c))
    graph = build_graph(parse_spec_string(ws.spec_string, input_size=(h, w, c)))
    names = ", ".join(f.name for f in files)
    prov = f"calibrated on {len(files)} images: {names}"
    if ws.provenance:
        prov = f"{ws.provenance}; {prov}"
    qws = quantize_model(graph, ws, images, provenance=prov)
    save_quant_weights(args.out, qws)
    print(f"wrote {args.out}: int8 {ws.spec_string}, "
          f"calibrated on {len(files)} images")
    return 0


def cmd_infer(args):
    image = read_ppm(args.image)
    size = image.shape
    if args.quant:
        graph, qws = load_quant_weights(args.model, input_size=size)
        prob = run_quant(graph, qws, image)
    else:
        ws = load_float_weights(args.model, input_size=size)
        graph = build_graph(parse_spec_string(ws.spec_string, input_size=size))
        prob = run_float(graph, ws, image)
    mask = predict_mask(prob, threshold=args.threshold)
    write_pgm_mask(args.out, mask)
    backend = "quant" if args.quant else "float"
    print(f"wrote {args.out} ({backend}, {int(mask.sum())} foreground px)")
    return 0


def cmd_bench(args):
    files = _ppm_files(args.data, args.limit)
    images = [read_ppm(f) for f in files]
    size = images[0].shape
    if args.quant:
        graph, qws = load_quant_weights(args.model, input_size=size)
        runner = QuantRunner(graph, qws)
    else:
        ws = load_float_weights(args.model, input_size=size)
        graph = build_graph(parse_spec_string(ws.spec_string, input_size=size))
        runner = FloatRunner(graph, ws)
    report = bench_mod.run_benchmark(
        runner, images, dataset_name=str(args.data), repetitions=args.reps
    )
    n, h, w, c = report.dataset_shape
    print(f"dataset: {args.data} ({n} images, {h}x{w}x{c})")
    print(f"backend: {report.backend}")
    line = (f"per-image: {report.per_image_mean:.2f} ms "
            f"± {report.per_image_std:.2f} ({report.repetitions} repetitions)")
    if report.note:
        line += f" [{report.note}]"
    print(line)
    if args.out:
        Path(args.out).write_text(bench_mod.report_to_json(report))
        print(f"wrote {args.out}")
    if args.baseline:
        base = bench_mod.report_from_json(Path(args.baseline).read_text())
        print(bench_mod.format_comparison(base, report))
    return 0


def cmd_plan(args):
    p = planner.plan(args.n, args.transfer, args.edge, args.cloud)
    print(f"on-device total: {p.edge_total_ms:.2f} ms "
          f"({p.n} x {p.edge_ms:.2f} ms)")
    print(f"offloaded total: {p.cloud_total_ms:.2f} ms "
          f"({p.transfer_ms:.2f} ms transfer + {p.n} x {p.cloud_ms:.2f} ms)")
    print(f"asymptotic speedup (cloud vs device): {p.asymptotic_speedup:.2f}x")
    if p.break_even is None:
        print("break-even batch size: none (device wins at every batch size)")
    else:
        print(f"break-even batch size: {p.break_even}")
    print(f"recommended target: {p.target}")
    return 0


def cmd_metrics(args):
    cup = read_pgm_mask(args.cup)
    disc = read_pgm_mask(args.disc)
    print(f"cup vertical diameter: {metrics.vertical_diameter(cup)} px")
    print(f"disc vertical diameter: {metrics.vertical_diameter(disc)} px")
    ratio = metrics.cup_disc_ratio(cup, disc)
    print(f"vertical cup/disc ratio: {ratio:.4f}")
    print(f"classification: {metrics.classify_cdr(ratio)}")
    if args.laterality:
        prof = metrics.rim_profile(cup, disc, args.laterality)
        s = prof.sectors
        print(f"rim sectors ({args.laterality} eye): "
              f"inferior={s['inferior']:.2f} superior={s['superior']:.2f} "
              f"nasal={s['nasal']:.2f} temporal={s['temporal']:.2f}")
        verdict = "satisfied" if metrics.istn_check(prof) else "violated"
        print(f"ISNT ordering: {verdict}")
    if (args.ref_cup is None) != (args.ref_disc is None):
        raise DataFormatError("--ref-cup and --ref-disc must be given together")
    if args.ref_cup:
        ref_cup = read_pgm_mask(args.ref_cup)
        ref_disc = read_pgm_mask(args.ref_disc)
        print(f"dice cup: {metrics.dice(cup, ref_cup):.4f}")
        print(f"dice disc: {metrics.dice(disc, ref_disc):.4f}")
    return 0


def cmd_params(args):
    spec = _resolve_spec(args)
    pc = count_params(spec)
    width = max(len(n) for n in pc.per_layer)
    print(f"{'layer':<{width}}  parameters")
    for name, n in pc.per_layer.items():
        print(f"{name:<{width}}  {n}")
    print(f"total: {pc.total} ({pc.mtp:.6f} million trainable parameters)")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except EdgeSegError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
