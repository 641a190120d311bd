"""critwave-plots <figure-kind> <inputs...> -o out.svg"""

from __future__ import annotations

import argparse
import json
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="critwave-plots", description="render figures from critwave artifacts")
    p.add_argument("kind", choices=FIGURE_KINDS)
    p.add_argument("inputs", nargs="+", help="artifact paths (CSV first, summary.json where needed)")
    p.add_argument("-o", "--output", required=True, help="output SVG path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = render(FigureSpec(args.kind, tuple(args.inputs), args.output))
    except (SchemaError, ValueError) as exc:
        print(json.dumps({"error": {"kind": "input", "message": str(exc)}}), file=sys.stderr)
        return 2
    print(f"{result.path} {json.dumps(result.annotations, default=str)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
