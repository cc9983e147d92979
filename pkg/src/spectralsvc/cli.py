"""Command-line interface.

Subcommands: run (one method on one dataset), sweep (run a ratio sweep),
compare (several methods side by side), lift (standalone label lifting
through a saved compression map), export-graph (k-NN graph edge list).
Flags mirror the PipelineConfig fields; a key=value config file can
preload them, with command-line flags taking precedence. Exit codes: 0
success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import data as dio
from .compression import lift_labels, load_composite_map
from .graph import build_knn_graph, save_edge_list
from .pipeline import (
    SWEEP_COLUMNS,
    ConfigError,
    PipelineConfig,
    compare_methods,
    format_table,
    run_pipeline,
    sweep_compression,
    write_csv_rows,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse defaults to exit code 2; usage problems are config errors
        raise ConfigError(message)


def _auto_or_float(text: str):
    return text if text == "auto" else float(text)


def _opt_float(text: str):
    return None if text.lower() == "none" else float(text)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--input", help="input CSV path")
    p.add_argument("--method", choices=("orig_svc", "proximity", "sep_svc", "compressed_sep_svc"))
    p.add_argument("--ratio", type=float, help="target compression ratio (compressed_sep_svc)")
    p.add_argument("--knn-k", type=int, dest="knn_k")
    p.add_argument("--weighting", choices=("gaussian", "unit"))
    p.add_argument("--embed-backend", choices=("smoothed", "eigen"), dest="embed_backend")
    p.add_argument("--embed-dim", type=int, dest="embed_dim")
    p.add_argument("--sweeps", type=int)
    p.add_argument("--q", type=_auto_or_float, help="Gaussian kernel width, or 'auto'")
    p.add_argument("--C", type=_auto_or_float, help="box bound in (0,1], or 'auto'")
    p.add_argument("--svdd-tol", type=float, dest="svdd_tol")
    p.add_argument("--svdd-max-passes", type=int, dest="svdd_max_passes")
    p.add_argument("--adjacency-m", type=int, dest="adjacency_m")
    p.add_argument("--r-margin", type=_opt_float, dest="r_margin")
    p.add_argument("--step0", type=_opt_float)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--grad-tol", type=float, dest="grad_tol")
    p.add_argument("--shrink", type=float)
    p.add_argument("--merge-eps", type=_opt_float, dest="merge_eps")
    p.add_argument("--sim-threshold", type=float, dest="sim_threshold")
    p.add_argument("--threshold-decay", type=float, dest="threshold_decay")
    p.add_argument("--threshold-floor", type=float, dest="threshold_floor")
    p.add_argument("--max-levels", type=int, dest="max_levels")
    p.add_argument("--seed-embed", type=int, dest="seed_embed")
    p.add_argument("--seed-subsample", type=int, dest="seed_subsample")
    p.add_argument("--no-standardize", action="store_false", dest="standardize", default=None)
    p.add_argument("--has-labels", action="store_true", dest="has_labels", default=None,
                   help="last CSV column is a ground-truth integer label")
    p.add_argument("--header", action="store_true", default=None, help="skip one header row")
    p.add_argument("--assign-outliers", action="store_true", dest="assign_outliers", default=None,
                   help="give outliers the label of their nearest labeled point")
    p.add_argument("--orig-svc-limit", type=int, dest="orig_svc_limit")
    p.add_argument("--out-labels", dest="out_labels")
    p.add_argument("--out-report", dest="out_report")
    p.add_argument("--dump-seps", dest="dump_seps", help="prefix for SEP coordinate/assignment dumps")


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _coerce(name: str, raw: str):
    if name in ("q", "C"):
        return _auto_or_float(raw)
    if name in ("r_margin", "step0", "merge_eps"):
        return _opt_float(raw)
    if name in ("standardize", "has_labels", "header", "assign_outliers"):
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key {name}: expected a boolean, got {raw!r}")
    default = _FIELD_TYPES[name].default
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, raw = (part.strip() for part in line.split("=", 1))
                if key not in _FIELD_TYPES:
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                values[key] = _coerce(key, raw)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    for name in _FIELD_TYPES:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    try:
        config = PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def build_parser() -> _Parser:
    parser = _Parser(prog="spectralsvc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one clustering method end to end")
    _add_config_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run compressed_sep_svc over several ratios")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--ratios", required=True,
                         help="comma-separated compression ratios, e.g. 2,5,10")
    p_sweep.add_argument("--out-csv", dest="out_csv", help="write sweep rows as CSV")

    p_cmp = sub.add_parser("compare", help="run several methods on one dataset")
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--methods", required=True,
                       help="comma-separated method names")
    p_cmp.add_argument("--out-csv", dest="out_csv", help="write comparison rows as CSV")

    p_lift = sub.add_parser("lift", help="lift coarse labels through a saved compression map")
    p_lift.add_argument("--map", required=True, dest="map_path")
    p_lift.add_argument("--coarse-labels", required=True, dest="coarse_labels")
    p_lift.add_argument("--out", required=True)

    p_exp = sub.add_parser("export-graph", help="write the k-NN graph as 'p q w' lines")
    p_exp.add_argument("--input", required=True)
    p_exp.add_argument("--knn-k", type=int, default=10, dest="knn_k")
    p_exp.add_argument("--weighting", choices=("gaussian", "unit"), default="gaussian")
    p_exp.add_argument("--has-labels", action="store_true", dest="has_labels")
    p_exp.add_argument("--header", action="store_true")
    p_exp.add_argument("--no-standardize", action="store_false", dest="standardize")
    p_exp.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    config = _build_config(args)
    _, report = run_pipeline(config)
    summary = {
        "method": report["method"],
        "n_clusters": report["n_clusters"],
        "n_outliers": report["n_outliers"],
        "achieved_ratio": round(report["achieved_ratio"], 3),
        "total_seconds": round(report["total_seconds"], 3),
    }
    if report["nmi"] is not None:
        summary["nmi"] = round(report["nmi"], 4)
    print("  ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


def _load_input(config: PipelineConfig) -> dio.DataSet:
    if not config.input:
        raise ConfigError("no input file given")
    try:
        return dio.load_dense_matrix(
            config.input, has_label_column=config.has_labels, skip_header=config.header
        )
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_sweep(args) -> int:
    config = _build_config(args)
    config.method = "compressed_sep_svc"
    try:
        ratios = [float(r) for r in args.ratios.split(",") if r.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --ratios: {exc}") from exc
    dataset = _load_input(config)
    rows = sweep_compression(config, dataset, ratios)
    print(format_table(rows, SWEEP_COLUMNS))
    if args.out_csv:
        write_csv_rows(rows, SWEEP_COLUMNS, args.out_csv)
    return 0


def _cmd_compare(args) -> int:
    config = _build_config(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("orig_svc", "proximity", "sep_svc", "compressed_sep_svc"):
            raise ConfigError(f"unknown method {m!r}")
    dataset = _load_input(config)
    columns = ("method", "nmi", "seconds", "error")
    rows = compare_methods(config, dataset, methods)
    print(format_table(rows, columns))
    if args.out_csv:
        write_csv_rows(rows, columns, args.out_csv)
    return 0


def _cmd_lift(args) -> int:
    try:
        cmap = load_composite_map(args.map_path)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(f"bad map file: {exc}") from exc
    coarse = np.loadtxt(args.coarse_labels, dtype=np.int64, ndmin=1)
    fine = lift_labels(cmap, coarse)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(str(int(v)) for v in fine))
        fh.write("\n")
    return 0


def _cmd_export_graph(args) -> int:
    try:
        dataset = dio.load_dense_matrix(
            args.input, has_label_column=args.has_labels, skip_header=args.header
        )
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    if args.standardize:
        dataset = dio.standardize(dataset)
    graph = build_knn_graph(dataset, args.knn_k, args.weighting)
    save_edge_list(graph, args.out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "lift": _cmd_lift,
    "export-graph": _cmd_export_graph,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
