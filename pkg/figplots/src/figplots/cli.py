"""Render a figure spec against experiment CSVs.

    plot --spec fig6.json --out fig6.png [--csv-dir results]
"""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import SchemaError, load_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("--spec", required=True, help="figure spec JSON")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--csv-dir", default=".",
                        help="directory the spec's CSV paths are relative to")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        result = render(spec, args.out, csv_dir=args.csv_dir)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.path} ({result.n_series} series)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
