"""Weighted k-NN graph construction and the graph Laplacian.

Neighbor search is exact brute force (O(n^2 d)): deterministic, no
approximation error, acceptable at the target scale of <= 10^4 points.
Distance ties break toward the lower vertex id. The graph is
union-symmetrized: an edge is kept if either endpoint selects the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._numeric import iter_row_chunks, squared_distances
from ._unionfind import UnionFind
from .data import DataSet

_ROW_CHUNK = 512
# exp() underflow floor; edge weights must stay strictly positive
_MIN_WEIGHT = 1e-300


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph; each edge stored once with p < q."""

    num_vertices: int
    edges_p: np.ndarray
    edges_q: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.edges_p, dtype=np.int64)
        q = np.asarray(self.edges_q, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        if not (p.shape == q.shape == w.shape):
            raise ValueError("edge arrays must have equal length")
        if p.size:
            if np.any(p >= q):
                raise ValueError("edges must satisfy p < q (no self-loops, stored once)")
            if p.min() < 0 or q.max() >= self.num_vertices:
                raise ValueError("vertex id out of range")
            if np.any(w <= 0):
                raise ValueError("edge weights must be strictly positive")
        for name, arr in (("edges_p", p), ("edges_q", q), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_edges(self) -> int:
        return self.edges_p.size

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric sparse adjacency matrix."""
        n = self.num_vertices
        rows = np.concatenate([self.edges_p, self.edges_q])
        cols = np.concatenate([self.edges_q, self.edges_p])
        vals = np.concatenate([self.weights, self.weights])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def degrees(self) -> np.ndarray:
        """Unweighted vertex degrees (neighbor counts)."""
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        np.add.at(deg, self.edges_p, 1)
        np.add.at(deg, self.edges_q, 1)
        return deg


def build_knn_graph(data: DataSet, k: int, weighting: str = "gaussian") -> Graph:
    """Union-symmetrized k-nearest-neighbor graph over the rows of data.

    gaussian weighting: w = exp(-||x_p - x_q||^2 / sigma^2), with sigma^2
    self-tuned as the mean squared k-th-neighbor distance. unit weighting
    sets every weight to 1. Duplicate points are allowed; a distance-0
    edge gets weight 1 under gaussian.
    """
    if weighting not in ("gaussian", "unit"):
        raise ValueError(f"unknown weighting {weighting!r}")
    n = data.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")

    x = data.values
    neighbor_ids = np.empty((n, k), dtype=np.int64)
    neighbor_d2 = np.empty((n, k), dtype=np.float64)
    for start, stop in iter_row_chunks(n, _ROW_CHUNK):
        d2 = squared_distances(x[start:stop], x)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        # stable sort on distance; equal distances fall back to id order
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        neighbor_ids[start:stop] = order
        neighbor_d2[start:stop] = np.take_along_axis(d2, order, axis=1)

    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = neighbor_ids.ravel()
    p = np.minimum(src, dst)
    q = np.maximum(src, dst)
    d2 = neighbor_d2.ravel()
    key = p * n + q
    _, first = np.unique(key, return_index=True)
    p, q, d2 = p[first], q[first], d2[first]

    if weighting == "unit":
        w = np.ones_like(d2)
    else:
        sigma2 = float(np.mean(neighbor_d2[:, -1]))
        if sigma2 > 0:
            w = np.maximum(np.exp(-d2 / sigma2), _MIN_WEIGHT)
        else:
            w = np.ones_like(d2)
        w[d2 == 0.0] = 1.0
    return Graph(n, p, q, w)


def laplacian(graph: Graph) -> sp.csr_matrix:
    """Graph Laplacian: L[p,q] = -w(p,q) on edges, L[p,p] = sum of incident weights."""
    n = graph.num_vertices
    diag = np.zeros(n, dtype=np.float64)
    np.add.at(diag, graph.edges_p, graph.weights)
    np.add.at(diag, graph.edges_q, graph.weights)
    rows = np.concatenate([graph.edges_p, graph.edges_q, np.arange(n)])
    cols = np.concatenate([graph.edges_q, graph.edges_p, np.arange(n)])
    vals = np.concatenate([-graph.weights, -graph.weights, diag])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def connected_components(graph: Graph) -> np.ndarray:
    """Per-vertex component labels 0..c-1, numbered by smallest member id."""
    uf = UnionFind(graph.num_vertices)
    for a, b in zip(graph.edges_p.tolist(), graph.edges_q.tolist()):
        uf.union(a, b)
    return uf.labels()


def components_from_laplacian(lap: sp.spmatrix) -> np.ndarray:
    """Component labels recovered from the off-diagonal sparsity pattern."""
    coo = sp.coo_matrix(lap)
    n = coo.shape[0]
    uf = UnionFind(n)
    for a, b, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
        if a != b and v != 0.0:
            uf.union(a, b)
    return uf.labels()


def save_edge_list(graph: Graph, path) -> None:
    """Write the graph as 'p q w' lines for external visualization."""
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, w in zip(graph.edges_p, graph.edges_q, graph.weights):
            fh.write(f"{int(a)} {int(b)} {float(w)!r}\n")
