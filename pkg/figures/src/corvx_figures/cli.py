"""Standalone figure renderer: one flag per PlotSpec field."""

import argparse
import sys

from corvx_figures.render import KINDS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corvx-figures",
        description="Regenerate study figures from exported result CSVs",
    )
    parser.add_argument(
        "--csv", action="append", required=True, dest="csv_paths",
        help="input CSV (repeat for the iterations overlay)",
    )
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--out", required=True, dest="out_path")
    parser.add_argument("--z-rescale", type=float, default=3.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            csv_paths=args.csv_paths,
            kind=args.kind,
            out_path=args.out_path,
            z_rescale=args.z_rescale,
        )
        path = render(spec)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
