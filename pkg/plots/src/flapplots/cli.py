"""Standalone figure script: flapsim-plot <kind> <csv...> -o <img> [--check]."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, PlotError, PlotSpec, check, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flapsim-plot",
        description="Regenerate figures from flapsim CSV outputs",
    )
    parser.add_argument("kind", help="one of: " + ", ".join(sorted(KINDS)))
    parser.add_argument("csv", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True, help="output PNG path")
    parser.add_argument("--check", action="store_true",
                        help="validate inputs and columns without rendering")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(kind=args.kind, inputs=tuple(args.csv), output=Path(args.output))
        if args.check:
            check(spec)
            print(f"ok: {args.kind} spec valid for {len(args.csv)} input(s)")
        else:
            out = render(spec)
            print(f"wrote {out}")
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
