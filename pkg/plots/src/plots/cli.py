"""Command-line entry point: ``plots render --figure figN --in DIR --out FILE``."""

from __future__ import annotations

import argparse
import sys

from .io import PlotDataError
from .render import RENDERERS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render mlcavity CSV artifacts into figures."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a CSV directory")
    p.add_argument(
        "--figure", required=True, choices=sorted(RENDERERS), help="figure id"
    )
    p.add_argument(
        "--in", dest="indir", required=True, help="directory with the input CSVs"
    )
    p.add_argument("--out", required=True, help="output image file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.figure, args.indir, args.out)
    except PlotDataError as exc:
        print(f"plot data error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
