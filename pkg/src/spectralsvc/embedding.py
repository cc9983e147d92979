"""Spectral feature embeddings and the pairwise spectral similarity score.

Two backends produce per-point feature vectors from a graph Laplacian:

* ``embed_eigenvectors`` -- bottom nontrivial Laplacian eigenvectors, the
  high-accuracy reference.
* ``embed_smoothed`` -- Gauss-Seidel relaxation of random +-1 vectors on
  the homogeneous system L x = 0. Much cheaper than an eigensolve; the
  relaxed vectors approximately span the same low-frequency subspace.

The spectral similarity of two points is the squared normalized inner
product of their embedding rows: s in [0, 1], with s = 1 for perfectly
correlated (parallel) rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import components_from_laplacian

_DENSE_EIG_LIMIT = 2000
_EIG_TOL = 1e-8
# a centered component segment whose norm is below this fraction of its
# pre-centering magnitude is Gauss-Seidel rounding noise, not signal
_COLLAPSE_REL = 1e-8


@dataclass(frozen=True)
class Embedding:
    """Per-point spectral feature vectors: row u is the embedded vector of point u."""

    vectors: np.ndarray
    eigenvalues: np.ndarray | None = field(default=None)
    degenerate_columns: int = 0

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError(f"vectors must be (n, K) with K >= 1, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding contains NaN or Inf")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _fix_signs(cols: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (first on ties) is positive.

    Ties are detected with a relative tolerance: symmetric eigenvectors
    come back from LAPACK with equal-magnitude entries an ulp apart.
    """
    out = cols.copy()
    for j in range(out.shape[1]):
        mags = np.abs(out[:, j])
        lead = int(np.argmax(mags >= mags.max() * (1.0 - 1e-12)))
        if out[lead, j] < 0:
            out[:, j] = -out[:, j]
    return out


def embed_eigenvectors(lap: sp.spmatrix, k_dims: int) -> Embedding:
    """Embedding from the k_dims smallest nontrivial Laplacian eigenvectors.

    The trivial (constant per connected component) eigenvectors are
    skipped: with c components, eigenpairs c..c+k_dims-1 of the ascending
    spectrum are returned. Columns are unit-normalized with a
    deterministic sign convention.
    """
    n = lap.shape[0]
    if not 1 <= k_dims < n:
        raise ValueError(f"embedding dimension must satisfy 1 <= K < n, got K={k_dims}, n={n}")
    n_trivial = int(components_from_laplacian(lap).max()) + 1
    wanted = k_dims + n_trivial
    if wanted > n:
        raise ValueError(
            f"graph has {n_trivial} components; only {n - n_trivial} nontrivial "
            f"eigenvectors exist, requested {k_dims}"
        )

    if n <= _DENSE_EIG_LIMIT or wanted > n // 2:
        vals, vecs = scipy.linalg.eigh(lap.toarray())
        vals, vecs = vals[:wanted], vecs[:, :wanted]
    else:
        # shift-invert at a small negative sigma targets the bottom of the
        # spectrum without factorizing a singular matrix
        v0 = np.full(n, 1.0 / np.sqrt(n))
        vals, vecs = spla.eigsh(
            lap.tocsc(), k=wanted, sigma=-1e-4, which="LM", v0=v0, tol=_EIG_TOL
        )
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]

    vecs = vecs[:, n_trivial:]
    vals = vals[n_trivial:]
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    return Embedding(_fix_signs(vecs), eigenvalues=vals)


def gauss_seidel_sweep(lap: sp.csr_matrix, x: np.ndarray) -> np.ndarray:
    """One in-place ascending-id Gauss-Seidel pass on L x = 0.

    x may hold several vectors as columns; all relax simultaneously.
    Vertices with zero degree have no diagonal to divide by and are left
    unchanged.
    """
    lap = lap.tocsr()
    indptr, indices, values = lap.indptr, lap.indices, lap.data
    n = lap.shape[0]
    for p in range(n):
        row = slice(indptr[p], indptr[p + 1])
        cols = indices[row]
        vals = values[row]
        off = cols != p
        diag = vals[~off].sum()
        if diag == 0.0:
            continue
        # L off-diagonals are -w, so -L_pq x_q sums neighbor contributions
        x[p] = -(vals[off] @ x[cols[off]]) / diag
    return x


def embed_smoothed(lap: sp.spmatrix, k_dims: int, sweeps: int, seed: int) -> Embedding:
    """Embedding from Gauss-Seidel-smoothed random vectors.

    k_dims vectors start from seeded random +-1 entries and relax for
    `sweeps` passes on L x = 0; each is then centered per connected
    component (the constant kernel direction carries no cluster
    information) and unit-normalized. A vector that collapses to the
    constant on every component ends up all-zero and is kept as a zero
    column (reported via a warning); if every vector collapses, no
    embedding is possible and a ValueError suggests a larger K or the
    eigenvector backend.
    """
    if k_dims < 1:
        raise ValueError(f"need at least one smoothed vector, got K={k_dims}")
    if sweeps < 1:
        raise ValueError(f"need at least one sweep, got {sweeps}")
    lap = lap.tocsr()
    n = lap.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, size=(n, k_dims)).astype(np.float64) * 2.0 - 1.0

    energy = None
    for _ in range(sweeps):
        x = gauss_seidel_sweep(lap, x)
        new_energy = np.einsum("ij,ij->j", x, lap @ x)
        if energy is not None:
            assert np.all(new_energy <= energy * (1 + 1e-9) + 1e-12), (
                "Gauss-Seidel energy increased"
            )
        energy = new_energy

    comps = components_from_laplacian(lap)
    degenerate = 0
    for c in range(comps.max() + 1):
        members = comps == c
        seg = x[members]
        before = np.linalg.norm(seg, axis=0)
        seg = seg - seg.mean(axis=0)
        after = np.linalg.norm(seg, axis=0)
        collapsed = after <= _COLLAPSE_REL * np.maximum(1.0, before)
        seg[:, collapsed] = 0.0
        degenerate += int(collapsed.sum())
        x[members] = seg

    norms = np.linalg.norm(x, axis=0)
    live = norms > 0.0
    if not live.any():
        raise ValueError(
            "all smoothed vectors collapsed to the constant on every component; "
            "increase K/sweeps ratio or use the eigenvector backend"
        )
    if degenerate:
        warnings.warn(
            f"{degenerate} smoothed vector/component segments collapsed to the "
            "constant and were zeroed",
            RuntimeWarning,
            stacklevel=2,
        )
    x[:, live] /= norms[live]
    return Embedding(x, degenerate_columns=int((~live).sum()))


def constant_embedding(n: int) -> Embedding:
    """All-ones embedding: every pair of points is perfectly similar.

    This is the exact limit of fully smoothed vectors on a connected
    graph, where relaxation has converged to the constant kernel and all
    points are spectrally indistinguishable.
    """
    return Embedding(np.ones((n, 1)) / np.sqrt(n))


def spectral_similarity(emb: Embedding, u: int, v: int) -> float:
    """Squared normalized inner product of embedding rows u and v, in [0, 1].

    By convention a point whose embedding row is all-zero is similar to
    nothing (returns 0).
    """
    xu, xv = emb.vectors[u], emb.vectors[v]
    nu, nv = float(xu @ xu), float(xv @ xv)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    s = float(xu @ xv) ** 2 / (nu * nv)
    return min(s, 1.0)


def pair_similarities(emb: Embedding, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Vectorized spectral similarity for aligned index arrays us, vs."""
    a = emb.vectors[us]
    b = emb.vectors[vs]
    num = np.einsum("ij,ij->i", a, b) ** 2
    den = np.einsum("ij,ij->i", a, a) * np.einsum("ij,ij->i", b, b)
    out = np.zeros(len(a))
    ok = den > 0.0
    out[ok] = num[ok] / den[ok]
    return np.minimum(out, 1.0)


def save_embedding_csv(emb: Embedding, path) -> None:
    """Dump the n x K embedding matrix as CSV for inspection."""
    np.savetxt(path, emb.vectors, delimiter=",")
