"""Command-line surface for checkpoint conversion and golden export."""

import argparse
import json
import sys

from . import convert, golden, reference

BASELINE_CONFIG = {
    "head": "mask",
    "causal": False,
    "prediction": "single",
    "summation": "full",
    "pathways": False,
    "frame": {"frame_len": 512, "hop": 128, "sample_rate": 16000,
              "window": "hann"},
    "channels": [16, 32, 64, 128, 128, 128],
    "kernel": [5, 2],
    "freq_stride": 2,
    "lstm_layers": 2,
    "lstm_hidden": 128,
    "dense_units": 512,
}


def cmd_make_checkpoint(args):
    config = dict(BASELINE_CONFIG)
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    reference.make_synthetic_checkpoint(args.out, config, seed=args.seed)
    print(f"wrote synthetic checkpoint {args.out}")
    return 0


def cmd_convert(args):
    convert.convert_checkpoint(args.checkpoint, args.out,
                               mapping_profile=args.profile)
    print(f"wrote {args.out}")
    return 0


def cmd_export_golden(args):
    golden.export_golden(args.checkpoint, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dccrn-convert",
        description="Convert reference checkpoints to DCW1 and export golden "
                    "test vectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-checkpoint",
                       help="build a seeded synthetic reference checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="model config JSON (default: baseline)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_checkpoint)

    p = sub.add_parser("convert", help="checkpoint -> DCW1 weight file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--profile", default="reference")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("export-golden",
                       help="record reference activations on the fixed probe")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_golden)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (convert.ConversionError, golden.GoldenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
