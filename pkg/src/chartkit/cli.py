"""Command-line interface: generate, chart, evaluate, plot, distances.

Diagnostics go to standard output as ``key=value`` lines; data only goes to
files.  Exit statuses: 0 success, 2 usage or validation error, 3 I/O error,
4 pipeline stage failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import List, Optional, Sequence

import numpy as np

from .channels import load_dataset, save_dataset
from .distances import build_distance_matrix
from .errors import DomainError, FormatError, InvariantError, StageError
from .isomap import STAGES, chart_channels
from .metrics import quality_curves
from .synth import PRESETS, ConfigError, generate_scenario, load_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_STAGE = 4

MEASURES = ("phase-insensitive", "normalized", "euclidean")


class CliError(Exception):
    def __init__(self, message, status):
        super().__init__(message)
        self.status = status


def _fmt(x) -> str:
    return repr(float(x))


def _emit(key, value) -> None:
    print(f"{key}={value}")


def _load(path):
    try:
        return load_dataset(path)
    except (OSError, FormatError) as exc:
        raise CliError(f"cannot read dataset {path}: {exc}", EXIT_IO) from exc


def _write_csv(path, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) if not isinstance(v, (int, np.integer)) else int(v) for v in row])
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def read_table(path):
    """Header and float rows of a comma-separated file (empty files give no header)."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    if not rows:
        return [], np.zeros((0, 0))
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise CliError(f"{path}: non-numeric entry ({exc})", EXIT_USAGE) from exc
    if data.size and data.shape[1] != len(header):
        raise CliError(f"{path}: rows do not match the header", EXIT_USAGE)
    return header, data.reshape(len(rows) - 1, len(header))


def _columns(header, data, prefix):
    idx = [i for i, h in enumerate(header) if h.startswith(prefix) and h[len(prefix):].isdigit()]
    return data[:, idx]


def parse_k_list(text: str) -> List[int]:
    """``"5,10,25"`` or an inclusive range ``"start:stop:step"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            return list(range(parts[0], parts[1] + 1, parts[2]))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid K list {text!r}") from None


def _threads(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be at least 1")
    return n


# ---------------------------------------------------------------- subcommands

def cmd_generate(args) -> int:
    if args.preset is None and args.config is None:
        raise CliError("give --preset or --config", EXIT_USAGE)
    config = PRESETS[args.preset]() if args.preset else None
    if args.config:
        try:
            config = load_config(args.config, config)
        except ConfigError as exc:
            raise CliError(str(exc), EXIT_USAGE) from exc
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", EXIT_IO) from exc
    if args.seed is not None:
        config = config.replace(rng_seed=args.seed)
    dataset = generate_scenario(config)
    try:
        save_dataset(dataset, args.output)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from exc
    _emit("N", dataset.matrix.shape[0])
    _emit("A", dataset.antenna_count)
    _emit("S", dataset.subcarrier_count)
    _emit("M", dataset.matrix.shape[1])
    _emit("seed", config.rng_seed)
    return EXIT_OK


def cmd_chart(args) -> int:
    dataset = _load(args.dataset)
    timings = {}
    try:
        result = chart_channels(dataset, dim=args.dim, k=args.k, connectivity=args.connectivity,
                                measure=args.measure, n_threads=args.threads, timings=timings)
    except StageError as exc:
        for stage in STAGES:
            if stage in timings:
                _emit(f"time_{stage}_s", _fmt(timings[stage]))
        _emit("failed_stage", exc.stage)
        raise CliError(str(exc), EXIT_STAGE) from exc
    for stage in STAGES:
        _emit(f"time_{stage}_s", _fmt(timings[stage]))
    _emit("geodesic_stress", _fmt(result.geodesic_stress))
    _emit("bridges", len(result.bridges))
    if result.negative_eigenvalues:
        _emit("negative_eigenvalues", "clipped")
    Z = result.points
    header = [f"z{c + 1}" for c in range(Z.shape[1])]
    if dataset.positions is not None:
        header += [f"p{c + 1}" for c in range(dataset.positions.shape[1])]
        Z = np.hstack([Z, dataset.positions])
    _write_csv(args.output, header, Z)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = _load(args.dataset)
    if dataset.positions is None:
        raise CliError("ground truth required: dataset has no positions", EXIT_USAGE)
    header, data = read_table(args.chart)
    Z = _columns(header, data, "z")
    if Z.shape[0] == 0 or Z.shape[1] == 0:
        raise CliError(f"{args.chart}: no data", EXIT_USAGE)
    if Z.shape[0] != dataset.positions.shape[0]:
        raise CliError(f"chart has {Z.shape[0]} rows but the dataset has "
                       f"{dataset.positions.shape[0]} channels", EXIT_USAGE)
    ct, tw = quality_curves(dataset.positions, Z, args.k_list)
    _write_csv(args.output, ["K", "CT", "TW"], zip(ct.ks, ct.scores, tw.scores))
    _emit("mean_ct", _fmt(ct.mean()))
    _emit("mean_tw", _fmt(tw.mean()))
    return EXIT_OK


def cmd_distances(args) -> int:
    dataset = _load(args.dataset)
    D = build_distance_matrix(dataset, args.measure, args.threads)
    try:
        with open(args.output, "w", newline="") as fh:
            D.to_csv(fh)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from exc
    _emit("N", D.values.shape[0])
    return EXIT_OK


def cmd_plot(args) -> int:
    from . import plotting

    header, data = read_table(args.input)
    if data.shape[0] == 0:
        raise CliError(f"{args.input}: no data", EXIT_USAGE)
    if args.kind == "scatter":
        Z = _columns(header, data, "z")
        if Z.shape[1] != 2:
            raise CliError(f"scatter needs a 2-D chart, got {Z.shape[1]} chart columns", EXIT_USAGE)
        P = _columns(header, data, "p")
        svg = plotting.scatter_svg(Z, P if P.shape[1] >= 2 else None)
    else:
        if not {"K", "CT", "TW"} <= set(header):
            raise CliError(f"{args.input}: curves need K, CT and TW columns", EXIT_USAGE)
        col = {h: data[:, i] for i, h in enumerate(header)}
        svg = plotting.curves_svg(col["K"], {"CT": col["CT"], "TW": col["TW"]})
    try:
        with open(args.output, "w", newline="") as fh:
            fh.write(svg)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from exc
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chartkit", description="Channel charting toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic channel dataset")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="key = value scenario file (applied on top of --preset)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("output", help="output dataset path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("chart", help="compute a channel chart")
    p.add_argument("dataset")
    p.add_argument("output", help="chart CSV path")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--measure", choices=MEASURES, default="phase-insensitive")
    p.add_argument("--connectivity", choices=("bridge", "fail"), default="bridge")
    p.add_argument("--threads", type=_threads, default=1)
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("evaluate", help="continuity and trustworthiness of a chart")
    p.add_argument("chart", help="chart CSV")
    p.add_argument("dataset", help="dataset with ground-truth positions")
    p.add_argument("output", help="output CSV with K, CT, TW")
    p.add_argument("--k-list", type=parse_k_list, default=[5, 10, 25, 50])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="render a chart or quality curves as SVG")
    p.add_argument("input", help="chart CSV or K,CT,TW CSV")
    p.add_argument("output", help="output SVG path")
    p.add_argument("--kind", choices=("scatter", "curves"), default="scatter")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("distances", help="export the pairwise distance matrix as CSV")
    p.add_argument("dataset")
    p.add_argument("output")
    p.add_argument("--measure", choices=MEASURES, default="phase-insensitive")
    p.add_argument("--threads", type=_threads, default=1)
    p.set_defaults(func=cmd_distances)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except (DomainError, InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
