"""Spectral data compression: aggregate similar points into pseudo-samples.

One compression level greedily matches each vertex with its most
spectrally similar unassigned graph neighbor (degree-descending visit
order, similarity threshold, pairwise subsets only); each subset is
replaced by the arithmetic mean of its members' original feature vectors.
Levels repeat on the compressed data until the requested ratio is met,
each level rebuilding the k-NN graph and embedding from scratch. Pairwise
matching at most halves the count per level, which makes the achieved
ratio predictable and keeps subsets from growing across cluster
boundaries; higher ratios simply take more levels.

Cluster labels computed on the compressed points are mapped back to the
original points by composing the per-level assignment maps.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet
from .embedding import (
    Embedding,
    constant_embedding,
    embed_eigenvectors,
    embed_smoothed,
    pair_similarities,
)
from .graph import Graph, build_knn_graph, laplacian


@dataclass(frozen=True)
class CompressionMap:
    """Surjection fine-point-index -> coarse-point-index for one level."""

    assign: np.ndarray

    def __post_init__(self):
        assign = np.asarray(self.assign, dtype=np.int64)
        if assign.ndim != 1 or assign.size < 1:
            raise ValueError("assign must be a non-empty 1-D index array")
        coarse = assign.max() + 1
        present = np.zeros(coarse, dtype=bool)
        present[assign] = True
        if assign.min() < 0 or not present.all():
            raise ValueError("assign must be a surjection onto 0..coarse_count-1")
        assign.setflags(write=False)
        object.__setattr__(self, "assign", assign)

    @property
    def fine_count(self) -> int:
        return self.assign.size

    @property
    def coarse_count(self) -> int:
        return int(self.assign.max()) + 1


@dataclass(frozen=True)
class CompositeMap:
    """Composable stack of per-level maps; level 0 is the finest."""

    fine_count: int
    levels: tuple[CompressionMap, ...] = ()

    def __post_init__(self):
        expected = self.fine_count
        for i, level in enumerate(self.levels):
            if level.fine_count != expected:
                raise ValueError(
                    f"level {i} maps {level.fine_count} points, expected {expected}"
                )
            expected = level.coarse_count

    @property
    def coarse_count(self) -> int:
        return self.levels[-1].coarse_count if self.levels else self.fine_count

    def compose(self) -> np.ndarray:
        """Single fine -> coarsest assignment array."""
        out = np.arange(self.fine_count, dtype=np.int64)
        for level in self.levels:
            out = level.assign[out]
        return out


def lift_labels(cmap: CompositeMap, coarse_labels) -> np.ndarray:
    """Propagate per-coarse-point labels back to the original points."""
    labels = np.asarray(coarse_labels)
    if labels.shape != (cmap.coarse_count,):
        raise ValueError(
            f"expected {cmap.coarse_count} coarse labels, got shape {labels.shape}"
        )
    for level in reversed(cmap.levels):
        labels = labels[level.assign]
    return labels


def aggregate_once(
    graph: Graph, emb: Embedding, sim_threshold: float, max_merges: int | None = None
) -> CompressionMap:
    """One greedy matching pass: pair each vertex with its most similar neighbor.

    Vertices are visited in descending degree order (ties toward the lower
    id, so hubs aggregate first); an unassigned vertex claims its
    unassigned neighbor of maximal spectral similarity if that similarity
    reaches sim_threshold (ties toward the lower neighbor id), else it
    stays a singleton. Coarse ids are numbered in subset-creation order.
    max_merges caps the number of pairs formed, which lets the driver stop
    a level exactly at the requested compression target.
    """
    n = graph.num_vertices
    if emb.n != n:
        raise ValueError(f"embedding has {emb.n} rows, graph has {n} vertices")
    adjacency = graph.adjacency()
    indptr, indices = adjacency.indptr, adjacency.indices
    order = np.lexsort((np.arange(n), -graph.degrees()))
    budget = n if max_merges is None else max_merges

    assign = np.full(n, -1, dtype=np.int64)
    next_id = 0
    for v in order:
        if assign[v] >= 0:
            continue
        if budget > 0:
            nbrs = indices[indptr[v] : indptr[v + 1]]
            nbrs = nbrs[assign[nbrs] < 0]
            if len(nbrs):
                sims = pair_similarities(emb, np.full(len(nbrs), v), nbrs)
                best = int(np.argmax(sims))  # CSR indices ascend, so ties pick the lower id
                if sims[best] >= sim_threshold:
                    assign[nbrs[best]] = next_id
                    budget -= 1
        assign[v] = next_id
        next_id += 1
    return CompressionMap(assign)


def build_pseudo_samples(
    data: DataSet, cmap: CompressionMap, point_weights: np.ndarray | None = None
) -> DataSet:
    """Mean of the original feature vectors over each subset.

    point_weights lets multi-level compression pass the number of original
    points each current row already represents, so a pseudo-sample is
    always the plain mean of its composed subset of original points.
    """
    if cmap.fine_count != data.n:
        raise ValueError(f"map covers {cmap.fine_count} points, data has {data.n}")
    coarse = cmap.coarse_count
    w = np.ones(data.n) if point_weights is None else np.asarray(point_weights, dtype=np.float64)
    sums = np.zeros((coarse, data.d))
    np.add.at(sums, cmap.assign, data.values * w[:, None])
    totals = np.zeros(coarse)
    np.add.at(totals, cmap.assign, w)
    return DataSet(sums / totals[:, None])


@dataclass(frozen=True)
class CompressionParams:
    """Per-level graph/embedding configuration and the threshold schedule."""

    knn_k: int = 10
    weighting: str = "gaussian"
    backend: str = "smoothed"  # or "eigen"
    embed_dim: int = 15
    sweeps: int = 10
    seed: int = 0
    sim_threshold: float = 0.9
    threshold_decay: float = 0.9
    threshold_floor: float = 0.3
    stall_fraction: float = 0.05
    max_levels: int = 20

    def __post_init__(self):
        if self.backend not in ("smoothed", "eigen"):
            raise ValueError(f"unknown embedding backend {self.backend!r}")
        if not 0 <= self.sim_threshold <= 1:
            raise ValueError(f"sim_threshold must be in [0, 1], got {self.sim_threshold}")


@dataclass(frozen=True)
class CompressionResult:
    data: DataSet
    cmap: CompositeMap
    target_reached: bool
    level_counts: tuple[int, ...] = ()
    graph_seconds: float = 0.0
    embed_seconds: float = 0.0
    aggregate_seconds: float = 0.0

    @property
    def achieved_ratio(self) -> float:
        return self.cmap.fine_count / self.cmap.coarse_count


def _level_embedding(lap, n: int, params: CompressionParams, level: int) -> Embedding:
    dim = max(1, min(params.embed_dim, n - 1))
    if params.backend == "eigen":
        return embed_eigenvectors(lap, dim)
    try:
        return embed_smoothed(lap, dim, params.sweeps, params.seed + level)
    except ValueError:
        # relaxation converged to the constant on every component: all
        # points are spectrally indistinguishable at this resolution, and
        # the similarity limit of fully smoothed vectors is 1 everywhere
        return constant_embedding(n)


def compress(
    data: DataSet, target_ratio: float, params: CompressionParams = CompressionParams()
) -> CompressionResult:
    """Compress data until n_compressed <= n / target_ratio.

    Each level rebuilds the k-NN graph and embedding on the current
    pseudo-samples and runs one greedy matching pass. A level that shrinks
    the count by less than stall_fraction lowers the similarity threshold
    by threshold_decay (floored); if the floor is reached and the level
    still stalls, or max_levels is exhausted, the best achieved result is
    returned with target_reached=False and a warning.
    """
    if not target_ratio >= 1:
        raise ValueError(f"target_ratio must be >= 1, got {target_ratio}")
    n = data.n
    target = n / target_ratio
    levels: list[CompressionMap] = []
    level_counts = [n]
    current = data
    weights = np.ones(n)
    threshold = params.sim_threshold
    graph_s = embed_s = agg_s = 0.0

    while current.n > target and len(levels) < params.max_levels and current.n > 1:
        t0 = time.perf_counter()
        k = min(params.knn_k, current.n - 1)
        graph = build_knn_graph(current, k, params.weighting)
        lap = laplacian(graph)
        t1 = time.perf_counter()
        emb = _level_embedding(lap, current.n, params, len(levels))
        t2 = time.perf_counter()
        # never merge past the target: the last level stops exactly on it
        budget = current.n - int(np.floor(target))
        cmap = aggregate_once(graph, emb, threshold, max_merges=budget)
        t3 = time.perf_counter()
        graph_s += t1 - t0
        embed_s += t2 - t1
        agg_s += t3 - t2

        reduction = 1.0 - cmap.coarse_count / cmap.fine_count
        if cmap.coarse_count < cmap.fine_count:
            levels.append(cmap)
            current = build_pseudo_samples(current, cmap, weights)
            new_weights = np.zeros(cmap.coarse_count)
            np.add.at(new_weights, cmap.assign, weights)
            weights = new_weights
            level_counts.append(current.n)
        if reduction < params.stall_fraction:
            if threshold <= params.threshold_floor + 1e-12:
                break
            threshold = max(params.threshold_floor, threshold * params.threshold_decay)

    reached = current.n <= target
    if not reached:
        warnings.warn(
            f"compression stopped at {current.n} points "
            f"(target {target:.1f}) after {len(levels)} levels",
            RuntimeWarning,
            stacklevel=2,
        )
    return CompressionResult(
        data=current,
        cmap=CompositeMap(n, tuple(levels)),
        target_reached=reached,
        level_counts=tuple(level_counts),
        graph_seconds=graph_s,
        embed_seconds=embed_s,
        aggregate_seconds=agg_s,
    )


def save_composite_map(cmap: CompositeMap, path) -> None:
    """One line per level: the space-separated coarse ids of that level's map."""
    with open(path, "w", encoding="utf-8") as fh:
        for level in cmap.levels:
            fh.write(" ".join(str(int(v)) for v in level.assign))
            fh.write("\n")


def load_composite_map(path, fine_count: int | None = None) -> CompositeMap:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    levels = tuple(
        CompressionMap(np.array(ln.split(), dtype=np.int64)) for ln in lines
    )
    if fine_count is None:
        if not levels:
            raise ValueError("empty map file needs an explicit fine_count")
        fine_count = levels[0].fine_count
    return CompositeMap(fine_count, levels)
