"""Cluster labeling by sphere-interior connectivity.

Two points belong to the same cluster when the straight segment between
them stays inside the trained hypersphere: every sampled interior point y
must satisfy f(y) <= R^2 (plus a small numeric margin), and so must both
endpoints. The original method applies the test to every pair of points
(O(n^2) tests); the proximity variant only tests the edges of a supplied
graph, whose connected components then form the clusters.

Points whose own f(x) exceeds the margin-padded radius are boundary
exterior (BSV-like) and get label -1 by default, or the label of the
nearest labeled point when assign_outliers is on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import squared_distances
from ._unionfind import UnionFind
from .data import DataSet
from .graph import Graph
from .svdd import SvddModel, radius2

# memory cap for batched segment evaluations
_BATCH_VALUES = 2_000_000


@dataclass(frozen=True)
class AdjacencyParams:
    """Segment sampling density m and the interior-test slack r_margin.

    r_margin=None resolves to 1e-6 * R^2 at use, a relative slack at the
    sphere surface.
    """

    m: int = 15
    r_margin: float | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"segment sample count m must be >= 1, got {self.m}")
        if self.r_margin is not None and self.r_margin < 0:
            raise ValueError(f"r_margin must be non-negative, got {self.r_margin}")

    def resolve_margin(self, model: SvddModel) -> float:
        return self.r_margin if self.r_margin is not None else 1e-6 * model.r_squared


def _segment_coeffs(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric sample weights for endpoints plus m interior points.

    The two-coefficient form ca*a + cb*b makes the sample set bitwise
    identical under endpoint swap, so the adjacency test is exactly
    symmetric.
    """
    t = np.arange(0, m + 2, dtype=np.float64)
    cb = t / (m + 1)
    ca = (m + 1 - t) / (m + 1)
    return ca, cb


def _segment_points(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Endpoints plus m evenly spaced interior samples, shape (m+2, d)."""
    ca, cb = _segment_coeffs(m)
    return ca[:, None] * a[None, :] + cb[:, None] * b[None, :]


def adjacent(model: SvddModel, a, b, params: AdjacencyParams) -> bool:
    """True iff the segment a-b (endpoints included) stays inside the sphere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    threshold = model.r_squared + params.resolve_margin(model)
    f = radius2(model, _segment_points(a, b, params.m))
    return bool(np.all(f <= threshold))


def _interior_mask(model: SvddModel, points: DataSet, params: AdjacencyParams) -> np.ndarray:
    threshold = model.r_squared + params.resolve_margin(model)
    return radius2(model, points.values) <= threshold


def _test_pairs_batch(
    model: SvddModel, x: np.ndarray, pairs_i: np.ndarray, pairs_j: np.ndarray, m: int, threshold: float
) -> np.ndarray:
    """Vectorized segment test for aligned index pairs; True where adjacent."""
    ca, cb = _segment_coeffs(m)
    ca, cb = ca[1:-1], cb[1:-1]
    a = x[pairs_i]
    b = x[pairs_j]
    # endpoints already known interior; only the m inner samples need testing
    seg = ca[None, :, None] * a[:, None, :] + cb[None, :, None] * b[:, None, :]
    f = radius2(model, seg.reshape(-1, x.shape[1])).reshape(len(a), m)
    return np.all(f <= threshold, axis=1)


def _finalize_labels(
    n: int,
    interior: np.ndarray,
    uf: UnionFind,
    points: DataSet,
    assign_outliers: bool,
) -> np.ndarray:
    labels = np.full(n, -1, dtype=np.int64)
    order: dict[int, int] = {}
    for v in range(n):
        if not interior[v]:
            continue
        root = uf.find(v)
        if root not in order:
            order[root] = len(order)
        labels[v] = order[root]
    if assign_outliers and order:
        outliers = np.nonzero(~interior)[0]
        if len(outliers):
            inside_idx = np.nonzero(interior)[0]
            d2 = squared_distances(points.values[outliers], points.values[inside_idx])
            nearest = inside_idx[np.argmin(d2, axis=1)]
            labels[outliers] = labels[nearest]
    return labels


def label_complete_graph(
    model: SvddModel,
    points: DataSet,
    params: AdjacencyParams,
    assign_outliers: bool = False,
) -> np.ndarray:
    """Labels from sphere-interior connectivity over all point pairs.

    Pairs are visited in lexicographic order; pairs whose endpoints are
    already in the same component skip the segment test (the relation
    only ever adds edges, so this cannot change the components).
    """
    n = points.n
    x = points.values
    interior = _interior_mask(model, points, params)
    threshold = model.r_squared + params.resolve_margin(model)
    inside_ids = np.nonzero(interior)[0]
    uf = UnionFind(n)

    chunk = max(1, _BATCH_VALUES // (params.m * max(1, len(model._support_x))))
    for pos, i in enumerate(inside_ids):
        candidates = inside_ids[pos + 1 :]
        for start in range(0, len(candidates), chunk):
            block = candidates[start : start + chunk]
            todo = np.array([j for j in block if not uf.connected(i, j)], dtype=np.int64)
            if not len(todo):
                continue
            hits = _test_pairs_batch(
                model, x, np.full(len(todo), i), todo, params.m, threshold
            )
            for j in todo[hits]:
                uf.union(int(i), int(j))
    return _finalize_labels(n, interior, uf, points, assign_outliers)


def label_proximity_graph(
    model: SvddModel,
    points: DataSet,
    graph: Graph,
    params: AdjacencyParams,
    assign_outliers: bool = False,
) -> np.ndarray:
    """Labels from sphere-interior connectivity tested only along graph edges."""
    if graph.num_vertices != points.n:
        raise ValueError(
            f"graph has {graph.num_vertices} vertices, points has {points.n} rows"
        )
    x = points.values
    interior = _interior_mask(model, points, params)
    threshold = model.r_squared + params.resolve_margin(model)
    uf = UnionFind(points.n)

    both_inside = interior[graph.edges_p] & interior[graph.edges_q]
    ep = graph.edges_p[both_inside]
    eq = graph.edges_q[both_inside]
    chunk = max(1, _BATCH_VALUES // (params.m * max(1, len(model._support_x))))
    for start in range(0, len(ep), chunk):
        p_blk, q_blk = ep[start : start + chunk], eq[start : start + chunk]
        hits = _test_pairs_batch(model, x, p_blk, q_blk, params.m, threshold)
        for a, b in zip(p_blk[hits], q_blk[hits]):
            uf.union(int(a), int(b))
    return _finalize_labels(points.n, interior, uf, points, assign_outliers)
