"""Normalized mutual information between two labelings.

Natural logarithms throughout (the base cancels in the ratio). Outlier
labels (-1) count as an ordinary cluster id, which honestly penalizes
methods that discard many points as outliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContingencyTable:
    """Cluster-by-class co-occurrence counts with marginals."""

    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int


def contingency(pred, truth) -> ContingencyTable:
    """Co-occurrence table; label values map to dense ids by first appearance."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(f"label vectors must be equal-length 1-D, got {pred.shape} vs {truth.shape}")
    if len(pred) == 0:
        raise ValueError("empty labelings")

    def dense(values):
        order: dict[int, int] = {}
        out = np.empty(len(values), dtype=np.int64)
        for i, v in enumerate(values.tolist()):
            if v not in order:
                order[v] = len(order)
            out[i] = order[v]
        return out, len(order)

    pi, np_ = dense(pred)
    ti, nt = dense(truth)
    counts = np.zeros((np_, nt), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return ContingencyTable(
        counts=counts,
        row_sums=counts.sum(axis=1),
        col_sums=counts.sum(axis=0),
        total=len(pred),
    )


def nmi(pred, truth) -> float:
    """Normalized mutual information in [0, 1].

    Degenerate single-cluster labelings make the normalizer 0/0: by
    convention the result is 1 when both sides are single-cluster (the
    partitions coincide) and 0 when only one is.
    """
    table = contingency(pred, truth)
    n = table.total
    ni = table.row_sums
    nj = table.col_sums

    row_factor = float(np.sum(ni * np.log(ni / n)))
    col_factor = float(np.sum(nj * np.log(nj / n)))
    if row_factor == 0.0 or col_factor == 0.0:
        return 1.0 if row_factor == col_factor else 0.0

    nij = table.counts
    mask = nij > 0
    outer = ni[:, None] * nj[None, :]
    numerator = float(np.sum(nij[mask] * np.log(n * nij[mask] / outer[mask])))
    return float(np.clip(numerator / np.sqrt(row_factor * col_factor), 0.0, 1.0))
