"""Figure tool: ``lia-plot <figure-id> --in records.csv [--in2 curves.csv]
--out fig.png``."""

from __future__ import annotations

import argparse
import sys

from .figures import (EmptySelectionError, FIGURE_IDS, FigureSpec,
                      SchemaError, render)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lia-plot", description=__doc__)
    parser.add_argument("figure", choices=FIGURE_IDS)
    parser.add_argument("--in", dest="records", required=True,
                        help="records/timings CSV from a sweep")
    parser.add_argument("--in2", dest="curves",
                        help="lai_curves.csv (for the lai_curves figure)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--log-y", action="store_true")
    args = parser.parse_args(argv)
    spec = FigureSpec(figure=args.figure, records_csv=args.records,
                      out_path=args.out, curves_csv=args.curves,
                      log_x=args.log_x, log_y=args.log_y)
    try:
        summary = render(spec)
    except (SchemaError, EmptySelectionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in summary.outputs:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
