"""Command-line entry point: rau-plot <kind> --in <csv> --out <img>."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotJob, SchemaError


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rau-plot",
        description="Render figures from rau CSV outputs")
    ap.add_argument("kind", choices=sorted(KINDS),
                    help="figure kind: factor trajectories, propagator "
                         "elements, or PT phase diagram")
    ap.add_argument("--in", dest="input_csv", required=True,
                    help="input CSV path")
    ap.add_argument("--out", dest="output", required=True,
                    help="output image path")
    ap.add_argument("--format", dest="fmt", choices=("png", "svg"),
                    default="png")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    job = PlotJob(input_csv=args.input_csv, kind=args.kind,
                  output=args.output, fmt=args.fmt)
    try:
        KINDS[args.kind](job)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
