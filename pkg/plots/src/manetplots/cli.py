"""CLI: render figures from a simulator results CSV.

    manetsim-plot --in results.csv --kind scaling --out fig.svg [--scheme fast]

Exit code 0 on success; errors print one JSON object to stderr and exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys

from .figures import FigureSpec, NoDataError, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetsim-plot", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--in", dest="infile", required=True, help="results CSV")
    p.add_argument("--kind", choices=["scaling", "bound-overlay", "delivery"], required=True)
    p.add_argument("--out", required=True, help="output image (svg/pdf/png by extension)")
    p.add_argument("--scheme", choices=["fast", "slow"], default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.infile, kind=args.kind,
                      output_path=args.out, scheme=args.scheme)
    try:
        info = render(spec)
    except SchemaError as exc:
        print(json.dumps({"error": "schema-mismatch", "message": str(exc)}), file=sys.stderr)
        return 2
    except NoDataError as exc:
        print(json.dumps({"error": "no-data", "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io-error", "message": str(exc)}), file=sys.stderr)
        return 2
    summary = {"out": info.output_path, "kind": info.kind,
               "rows_used": info.rows_used, "rows_skipped": info.rows_skipped}
    if info.slope is not None:
        summary["slope"] = info.slope
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
