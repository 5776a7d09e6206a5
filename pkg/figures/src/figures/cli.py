"""figures --kind <k> --in <csv|jsonl> --out <png|svg>"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__)
    parser.add_argument("--kind", required=True, choices=list(KINDS))
    parser.add_argument("--in", dest="inputs", required=True, action="append",
                        help="input CSV/JSONL in the experiment schema (repeatable)")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    parser.add_argument("--linear-x", action="store_true")
    parser.add_argument("--linear-y", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not (args.out.endswith(".png") or args.out.endswith(".svg")):
        print("error: --out must end in .png or .svg", file=sys.stderr)
        return 2
    spec = FigureSpec(
        inputs=tuple(args.inputs),
        kind=args.kind,
        out=args.out,
        logx=not args.linear_x,
        logy=not args.linear_y,
    )
    try:
        report = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    for key, gap in report.slope_agreements.items():
        print(f"{args.kind}: refit slope for {key} agrees with primary fit to {gap:.2e}")
    print(f"{args.kind}: {report.n_rows} rows -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
