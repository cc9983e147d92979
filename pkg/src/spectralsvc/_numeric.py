"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances between rows of a and rows of b.

    Uses the expansion ||x-y||^2 = ||x||^2 + ||y||^2 - 2<x,y>; negative
    rounding residue is clipped to 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def iter_row_chunks(n: int, chunk: int):
    """Yield (start, stop) row ranges covering [0, n)."""
    start = 0
    while start < n:
        stop = min(start + chunk, n)
        yield start, stop
        start = stop
