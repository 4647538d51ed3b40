"""render_figures: draw every sweep CSV in a directory as a figure."""

import argparse
import sys
from pathlib import Path

from .figures import figure_spec_for, render
from .schema import SchemaError, load_meta, read_sweep, reference_lines_for


def build_parser():
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render SNR sweep CSVs (plus meta.json reference lines) "
        "as one figure per scenario.",
    )
    parser.add_argument("csv_dir", help="directory holding <scenario>.csv and meta.json")
    parser.add_argument("--out", required=True, help="directory for the images")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    parser.add_argument(
        "--linear",
        action="store_true",
        help="plot linear SNR instead of the default dB axis",
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    csv_dir = Path(args.csv_dir)
    if not csv_dir.is_dir():
        print(f"not a directory: {csv_dir}", file=sys.stderr)
        return 2
    csv_paths = sorted(csv_dir.glob("*.csv"))
    if not csv_paths:
        print(f"no sweep CSVs found in {csv_dir}", file=sys.stderr)
        return 2
    meta = load_meta(csv_dir)
    out_dir = Path(args.out)
    y_scale = "linear" if args.linear else "db"
    try:
        for path in csv_paths:
            points = read_sweep(path)
            spec = figure_spec_for(path.stem, meta)
            refs = {
                key: value
                for key, value in reference_lines_for(meta, path.stem).items()
                if key in spec.reference_keys
            }
            summary = render(
                spec, points, refs, out_dir / f"{path.stem}.{args.format}",
                y_scale=y_scale,
            )
            print(
                f"wrote {summary.out_path} "
                f"({len(summary.series_labels)} series, "
                f"{len(summary.reference_lines)} reference lines)"
            )
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
