"""End-to-end clustering pipelines and experiment drivers.

Four methods share one configuration surface:

* ``orig_svc``            -- SVDD on all points, complete-graph labeling.
* ``proximity``           -- SVDD on all points, labeling restricted to
                             k-NN graph edges.
* ``sep_svc``             -- SVDD on all points, gradient descent to SEPs,
                             complete-graph labeling of the SEPs only.
* ``compressed_sep_svc``  -- spectral compression to the requested ratio,
                             then SEP-based clustering on the pseudo-
                             samples, labels lifted back to the originals.

Every run emits a JSON report (stage timings, achieved ratio, cluster
count, NMI when ground truth is available, convergence warnings, and the
fully resolved configuration) plus a label file with one integer per row,
-1 marking outliers. All randomness flows from the two named seeds in the
config, so runs with identical configs are reproducible byte for byte
(timing fields aside).
"""

from __future__ import annotations

import copy
import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import compression as comp
from . import data as dio
from . import labeling as lab
from . import sep as sepmod
from . import svdd
from .graph import build_knn_graph
from .metrics import nmi

SCHEMA_VERSION = 1
METHODS = ("orig_svc", "proximity", "sep_svc", "compressed_sep_svc")
STAGES = ("graph", "embed", "compress", "train", "sep", "label", "lift")


class ConfigError(ValueError):
    """Invalid configuration; maps to CLI exit code 1."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    input: str = ""
    method: str = "compressed_sep_svc"
    ratio: float = 10.0
    knn_k: int = 10
    weighting: str = "gaussian"
    embed_backend: str = "smoothed"
    embed_dim: int = 15
    sweeps: int = 10
    q: float | str = "auto"
    C: float | str = 1.0
    svdd_tol: float = 1e-4
    svdd_max_passes: int = 200
    adjacency_m: int = 15
    r_margin: float | None = None
    step0: float | None = None
    max_iters: int = 500
    grad_tol: float = 1e-6
    shrink: float = 0.5
    merge_eps: float | None = None
    sim_threshold: float = 0.9
    threshold_decay: float = 0.9
    threshold_floor: float = 0.3
    max_levels: int = 20
    seed_embed: int = 0
    seed_subsample: int = 0
    standardize: bool = True
    has_labels: bool = False
    header: bool = False
    assign_outliers: bool = False
    orig_svc_limit: int = 20000
    out_labels: str | None = None
    out_report: str | None = None
    dump_seps: str | None = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.ratio >= 1:
            raise ConfigError(f"ratio must be >= 1, got {self.ratio}")
        if isinstance(self.q, str) and self.q != "auto":
            raise ConfigError(f"q must be a positive number or 'auto', got {self.q!r}")
        if isinstance(self.C, str) and self.C != "auto":
            raise ConfigError(f"C must be a number in (0,1] or 'auto', got {self.C!r}")


class _StageTimer:
    def __init__(self):
        self.seconds = {name: 0.0 for name in STAGES}

    def run(self, stage: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except ConfigError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        finally:
            self.seconds[stage] += time.perf_counter() - t0


def _resolve_c(c: float | str, n: int) -> float:
    if c == "auto":
        # keep roughly a fixed small budget of boundary-exterior points
        return min(1.0, 20.0 / n)
    return float(c)


def run_on_dataset(dataset: dio.DataSet, config: PipelineConfig):
    """Run one method on an in-memory dataset.

    Returns (labels, report). The report is a plain JSON-ready dict.
    """
    config.validate()
    start = time.perf_counter()
    timer = _StageTimer()
    warnings_out: dict = {}
    resolved: dict = {}

    points = dataset
    if config.standardize:
        points = dio.standardize(points)

    if config.method == "orig_svc" and points.n > config.orig_svc_limit:
        raise ConfigError(
            f"orig_svc is O(n^2) in labeling and limited to {config.orig_svc_limit} "
            f"points (got {points.n}); raise orig_svc_limit to override"
        )

    cparams = comp.CompressionParams(
        knn_k=config.knn_k,
        weighting=config.weighting,
        backend=config.embed_backend,
        embed_dim=config.embed_dim,
        sweeps=config.sweeps,
        seed=config.seed_embed,
        sim_threshold=config.sim_threshold,
        threshold_decay=config.threshold_decay,
        threshold_floor=config.threshold_floor,
        max_levels=config.max_levels,
    )

    cmap = None
    train_set = points
    if config.method == "compressed_sep_svc":
        result = timer.run("compress", comp.compress, points, config.ratio, cparams)
        timer.seconds["graph"] += result.graph_seconds
        timer.seconds["embed"] += result.embed_seconds
        timer.seconds["compress"] = max(
            0.0, timer.seconds["compress"] - result.graph_seconds - result.embed_seconds
        )
        train_set = result.data
        cmap = result.cmap
        warnings_out["compression_target_reached"] = result.target_reached
        resolved["level_counts"] = list(result.level_counts)

    q = config.q if config.q != "auto" else svdd.suggest_q(train_set, seed=config.seed_subsample)
    c_bound = _resolve_c(config.C, train_set.n)
    params = svdd.KernelParams(q=float(q), C=c_bound)
    resolved.update({"q": params.q, "C": params.C, "n_train": train_set.n})

    model = timer.run(
        "train", svdd.train, train_set, params, config.svdd_tol, config.svdd_max_passes
    )
    warnings_out["svdd_converged"] = model.converged
    resolved["kkt_violation"] = model.kkt_violation
    resolved["r_squared"] = model.r_squared

    adj = lab.AdjacencyParams(m=config.adjacency_m, r_margin=config.r_margin)
    resolved["r_margin"] = adj.resolve_margin(model)

    if config.method == "orig_svc":
        labels = timer.run(
            "label", lab.label_complete_graph, model, points, adj, config.assign_outliers
        )
    elif config.method == "proximity":
        graph = timer.run("graph", build_knn_graph, points, config.knn_k, config.weighting)
        labels = timer.run(
            "label", lab.label_proximity_graph, model, points, graph, adj,
            config.assign_outliers,
        )
    else:  # sep_svc on the full data, or on the compressed pseudo-samples
        opts = sepmod.DescentOptions(
            step0=config.step0,
            max_iters=config.max_iters,
            grad_tol=config.grad_tol,
            shrink=config.shrink,
        )
        merge_eps = (
            config.merge_eps if config.merge_eps is not None else sepmod.default_merge_eps(model)
        )
        resolved["merge_eps"] = merge_eps
        resolved["step0"] = opts.resolve_step0(model)
        seps = timer.run("sep", sepmod.find_seps, model, train_set, opts, merge_eps)
        warnings_out["sep_non_converged"] = seps.non_converged
        resolved["sep_count"] = seps.count
        sep_labels = timer.run("label", sepmod.label_seps, model, seps, adj)
        if config.dump_seps:
            sepmod.save_sep_csv(
                seps, config.dump_seps + "_points.csv", config.dump_seps + "_assign.csv"
            )

        def _lift():
            coarse = sep_labels[seps.assignment]
            return comp.lift_labels(cmap, coarse) if cmap is not None else coarse

        labels = timer.run("lift", _lift)

    report = {
        "schema_version": SCHEMA_VERSION,
        "method": config.method,
        "input": config.input,
        "n": dataset.n,
        "d": dataset.d,
        "achieved_ratio": (dataset.n / train_set.n) if cmap is not None else 1.0,
        "compressed_count": train_set.n,
        "n_clusters": int(len(set(labels[labels >= 0].tolist()))),
        "n_outliers": int((labels < 0).sum()),
        "nmi": (
            float(nmi(labels, dataset.truth_labels))
            if dataset.truth_labels is not None
            else None
        ),
        "warnings": warnings_out,
        "resolved": resolved,
        "config": {k: v for k, v in asdict(config).items()},
        "stage_seconds": timer.seconds,
        "total_seconds": time.perf_counter() - start,
    }
    return labels, report


def _write_labels(labels: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(str(int(v)) for v in labels))
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_report(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def run_pipeline(config: PipelineConfig):
    """Load the input file, run the configured method, write outputs.

    Output files are only written after every stage succeeds, so a failed
    run leaves no partial artifacts; stage errors propagate as StageError
    with the stage name attached.
    """
    config.validate()
    if not config.input:
        raise ConfigError("no input file given")
    if not os.path.exists(config.input):
        raise ConfigError(f"input file not found: {config.input}")
    dataset = dio.load_dense_matrix(
        config.input, has_label_column=config.has_labels, skip_header=config.header
    )
    labels, report = run_on_dataset(dataset, config)
    if config.out_labels:
        _write_labels(labels, config.out_labels)
    if config.out_report:
        _write_report(report, config.out_report)
    return labels, report


SWEEP_COLUMNS = (
    "ratio",
    "achieved_ratio",
    "nmi",
    "total_seconds",
    *(f"{s}_seconds" for s in STAGES),
    "error",
)


def sweep_compression(config: PipelineConfig, dataset: dio.DataSet, ratios) -> list[dict]:
    """One compressed run per ratio with shared seeds; plot-ready rows.

    Failures are recorded in the row's error column and the sweep
    continues.
    """
    if config.method != "compressed_sep_svc":
        raise ConfigError(f"sweep requires method=compressed_sep_svc, got {config.method!r}")
    rows = []
    for ratio in ratios:
        run_cfg = copy.deepcopy(config)
        run_cfg.ratio = float(ratio)
        run_cfg.out_labels = None
        run_cfg.out_report = None
        row = dict.fromkeys(SWEEP_COLUMNS, "")
        row["ratio"] = float(ratio)
        try:
            _, report = run_on_dataset(dataset, run_cfg)
            row["achieved_ratio"] = report["achieved_ratio"]
            row["nmi"] = report["nmi"] if report["nmi"] is not None else ""
            row["total_seconds"] = report["total_seconds"]
            for stage in STAGES:
                row[f"{stage}_seconds"] = report["stage_seconds"][stage]
        except Exception as exc:  # noqa: BLE001 - recorded per row by contract
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def compare_methods(config: PipelineConfig, dataset: dio.DataSet, methods) -> list[dict]:
    """Run several methods on one dataset; returns (method, nmi, seconds) rows.

    Guard violations (e.g. orig_svc over its size limit) are reported in
    the row's error column; the other methods still run.
    """
    rows = []
    for method in methods:
        run_cfg = copy.deepcopy(config)
        run_cfg.method = method
        run_cfg.out_labels = None
        run_cfg.out_report = None
        row = {"method": method, "nmi": "", "seconds": "", "error": ""}
        try:
            _, report = run_on_dataset(dataset, run_cfg)
            row["nmi"] = report["nmi"] if report["nmi"] is not None else ""
            row["seconds"] = report["total_seconds"]
        except Exception as exc:  # noqa: BLE001 - recorded per row by contract
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def write_csv_rows(rows: list[dict], columns, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        writer.writerows(rows)


def format_table(rows: list[dict], columns) -> str:
    """Plain fixed-width text table for terminal output."""
    def fmt(v):
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    cells = [[fmt(row[c]) for c in columns] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) if cells else len(c)
              for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    for r in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)
