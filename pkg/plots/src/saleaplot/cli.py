"""Command line for rendering figures from experiment CSVs.

Usage: salea-plot --kind threshold --in summary.csv --out fig1.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salea-plot", description=__doc__)
    parser.add_argument("--kind", choices=KINDS, required=True, help="figure kind")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--cap-line", type=float, default=500.0, help="horizontal cap guide (normalized generations)")
    parser.add_argument("--linear-x", action="store_true", help="disable the log x-axis of f_sweep/scaling")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=tuple(args.inputs),
            output=args.out,
            cap_line=args.cap_line,
            log_x=not args.linear_x,
        )
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
