"""Command-line entry: `figures render <name> --in <dir> --out <dir>`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render static figures from spintel CSV/JSON outputs.")
    sub = parser.add_subparsers(dest="command", required=True)
    ren = sub.add_parser("render", help="render one figure")
    ren.add_argument("name", help="fig2..fig7")
    ren.add_argument("--in", dest="input_dir", required=True,
                     help="directory holding the figure manifest and data")
    ren.add_argument("--out", dest="output_dir", required=True,
                     help="directory for the rendered image")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(args.name, Path(args.input_dir), Path(args.output_dir))
    try:
        target = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
