"""Command-line entry point.

    kdv5-plot <kind> --in series.csv [--in series_refined.csv] --out fig.png

Kinds: timeseries, drift, refinement-ratio (two inputs), ratio-histogram.
Exit codes: 0 written; 2 schema mismatch (column diff on stderr); 4 usage.
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotJob, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kdv5-plot", description="Render kdv5 scenario CSV outputs to PNG figures"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument(
        "--in", dest="inputs", action="append", required=True,
        help="input series.csv (give twice for refinement-ratio)",
    )
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--columns", default=None, help="comma list for timeseries panels")
    args = parser.parse_args(argv)

    columns = [c.strip() for c in args.columns.split(",")] if args.columns else None
    try:
        job = PlotJob(args.kind, args.inputs, args.out, columns=columns)
    except ValueError as exc:
        print(f"kdv5-plot: {exc}", file=sys.stderr)
        return 4
    try:
        out = render(job)
    except SchemaError as exc:
        print(f"kdv5-plot: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"kdv5-plot: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
