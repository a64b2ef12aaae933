"""Command-line front end: compute, compare, map, simulate.

Exit codes: 0 success, 1 input or validation error, 2 insufficient data.
Diagnostics go to stderr; stdout carries one informative line per run. All
outputs are written atomically and are byte-identical for identical inputs
and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import ingest, mapping, metrics, sim
from .errors import (
    AlignmentError,
    InsufficientDataError,
    ParseError,
    SlipmeterError,
)
from .fileio import atomic_write_text

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INSUFFICIENT_DATA = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags by default, which collides with the
    # insufficient-data code; remap to the input-error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="slipmeter",
        description="Quantify and compare the motion-distortion difficulty of UGV datasets.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_compute = sub.add_parser(
        "compute",
        help="compute the distortion series and summary for a dataset directory",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p_compute.add_argument("dataset", help="directory with dataset.toml, commands.csv, poses/velocities.csv")
    p_compute.add_argument("--out", default=".", help="output directory")
    p_compute.add_argument("--grid-dt", type=float, default=ingest.DEFAULT_GRID_DT, help="alignment grid step [s]")
    p_compute.add_argument("--max-gap", type=float, default=ingest.DEFAULT_MAX_GAP, help="max distance to a raw sample [s]")
    p_compute.add_argument("--angular-weight", type=float, default=1.0, help="length scale for the angular term [m]")
    p_compute.add_argument("--stride", type=int, default=1, help="keep every stride-th grid step")
    p_compute.set_defaults(func=cmd_compute)

    p_compare = sub.add_parser(
        "compare",
        help="compare two datasets (series CSVs or summary JSONs)",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p_compare.add_argument("a", help="baseline: .distortion.csv series or .summary.json")
    p_compare.add_argument("b", help="candidate: .distortion.csv series or .summary.json")
    p_compare.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p_compare.add_argument("--angular-weight", type=float, default=1.0, help="weight the series were computed with [m]")
    p_compare.add_argument("--stride", type=int, default=1, help="decimate both series before testing")
    p_compare.add_argument("--out", default=None, help="output JSON path (default: <b>_vs_<a>.comparison.json)")
    p_compare.set_defaults(func=cmd_compare)

    p_map = sub.add_parser(
        "map",
        help="render the kinetic-energy vs terrain-complexity map",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p_map.add_argument("catalog", help="catalog CSV (label,vehicle,mass,v_max,terrain,model_type)")
    p_map.add_argument("--terrain-scale", default=None, help="override scale CSV (name,ordinal)")
    p_map.add_argument("--out", default="map", help="output path base (writes <base>.csv and <base>.svg)")
    p_map.set_defaults(func=cmd_map)

    p_sim = sub.add_parser(
        "simulate",
        help="generate a synthetic dataset directory from a scenario config",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p_sim.add_argument("scenario", help="scenario config file (key = value)")
    p_sim.add_argument("--out", default="sim_dataset", help="output dataset directory")
    p_sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def _json_ready(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def _write_json(path, payload):
    payload = {k: _json_ready(v) for k, v in payload.items()}
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def cmd_compute(args) -> int:
    dataset = ingest.load_dataset(args.dataset, grid_dt=args.grid_dt, max_gap=args.max_gap)
    series = metrics.distortion_series(dataset, angular_weight=args.angular_weight, stride=args.stride)
    stats = metrics.summarize(series)

    out_dir = Path(args.out)
    series_path = out_dir / f"{dataset.name}.distortion.csv"
    summary_path = out_dir / f"{dataset.name}.summary.json"
    metrics.write_series_csv(series, series_path)
    payload = {"dataset": dataset.name, **stats.as_dict(), "angular_weight": args.angular_weight}
    payload["params"] = {
        "grid_dt": args.grid_dt,
        "max_gap": args.max_gap,
        "angular_weight": args.angular_weight,
        "stride": args.stride,
    }
    _write_json(summary_path, payload)
    print(f"{dataset.name}: n={stats.n} median={stats.median:.6g} (wrote {series_path}, {summary_path})")
    return EXIT_OK


def _load_compare_input(path_text, angular_weight):
    """Returns (name, series or None, median, n or None)."""
    path = Path(path_text)
    if path.suffix == ".json":
        if not path.exists():
            raise ParseError("file not found", path=path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", path=path)
        for key in ("dataset", "median"):
            if key not in data:
                raise ParseError(f"summary JSON missing key {key!r}", path=path)
        return str(data["dataset"]), None, float(data["median"]), data.get("n")
    series = metrics.read_series_csv(path, angular_weight=angular_weight)
    if len(series) == 0:
        raise InsufficientDataError(f"{path}: series is empty")
    return series.dataset_name, series, metrics.summarize(series).median, len(series)


def cmd_compare(args) -> int:
    name_a, series_a, median_a, n_a = _load_compare_input(args.a, args.angular_weight)
    name_b, series_b, median_b, n_b = _load_compare_input(args.b, args.angular_weight)

    if series_a is not None and series_b is not None:
        series_a = metrics.decimate(series_a, args.stride)
        series_b = metrics.decimate(series_b, args.stride)
        result = metrics.compare(series_a, series_b, alpha=args.alpha)
        payload = {"a": name_a, "b": name_b, **result.as_dict()}
        if result.significant:
            direction = "harder than" if result.median_b > result.median_a else "easier than"
            verdict = f"{name_b} is {direction} {name_a}"
        else:
            verdict = f"{name_b} and {name_a} are indistinguishable"
        line = (
            f"{verdict} at alpha={args.alpha:g} "
            f"(median ratio {result.median_ratio:.3f}, p={result.p_value:.4g})"
        )
    else:
        # Summary-only inputs carry no samples, so no rank test is possible;
        # report the median ratio alone.
        if median_a == 0.0:
            ratio = math.nan if median_b == 0.0 else math.inf
            degenerate = True
        else:
            ratio, degenerate = median_b / median_a, False
        payload = {
            "a": name_a,
            "b": name_b,
            "u_statistic": None,
            "p_value": None,
            "median_a": median_a,
            "median_b": median_b,
            "median_ratio": ratio,
            "ratio_degenerate": degenerate,
            "significant": None,
            "n_a": n_a,
            "n_b": n_b,
            "alpha": args.alpha,
            "method": "median_only",
        }
        line = f"median ratio {ratio:.3f} ({name_b} vs {name_a}); no significance test (summary-only inputs)"

    payload["params"] = {"alpha": args.alpha, "stride": args.stride, "angular_weight": args.angular_weight}
    out = Path(args.out) if args.out else Path(f"{name_b}_vs_{name_a}.comparison.json")
    _write_json(out, payload)
    print(line)
    return EXIT_OK


def cmd_map(args) -> int:
    scale = mapping.read_terrain_scale_csv(args.terrain_scale) if args.terrain_scale else None
    catalog = mapping.read_catalog_csv(args.catalog, scale=scale)
    csv_path, svg_path = mapping.render_map(catalog, output=args.out, scale=scale)
    print(f"mapped {len(catalog)} deployments (wrote {csv_path}, {svg_path})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = sim.load_scenario(args.scenario)
    out_dir = sim.run_scenario(scenario, args.out, seed=args.seed)
    print(f"simulated scenario {scenario.name!r} -> {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InsufficientDataError, AlignmentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT_DATA
    except SlipmeterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
