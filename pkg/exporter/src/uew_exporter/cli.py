"""Command line entry point: uew-export."""

import argparse
import os
import sys

from .errors import ExporterError
from .export import export_file, format_export_map


def build_parser():
    p = argparse.ArgumentParser(
        prog="uew-export",
        description="Export a trained Keras U-Net checkpoint to a UEW weight file.",
    )
    p.add_argument("model", help="model file: .keras, .h5, or bare .weights.h5")
    p.add_argument(
        "--spec",
        required=True,
        metavar="L/F/Y|N/IR",
        help='architecture string, e.g. "6/40/Y/1.1"',
    )
    p.add_argument("--out", required=True, help="UEW file to write")
    p.add_argument(
        "--input-size",
        type=int,
        default=128,
        metavar="N",
        help="spatial size used only when rebuilding from .weights.h5 (default 128)",
    )
    p.add_argument(
        "--channels",
        type=int,
        default=3,
        metavar="C",
        help="input channels used only when rebuilding from .weights.h5 (default 3)",
    )
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    size = (args.input_size, args.input_size, args.channels)
    try:
        emap = export_file(args.model, args.spec, args.out, input_size=size)
    except ExporterError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(format_export_map(emap))
    print(f"wrote {args.out} ({os.path.getsize(args.out):,} bytes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
