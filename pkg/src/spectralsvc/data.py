"""Dataset loading, standardization, and synthetic fixtures.

Datasets are dense row-major float64 matrices with an optional integer
label vector. CSV on disk: comma-separated decimals, '\\n' rows, no header
by default; the label column, when present, is the last column and is
parsed as a base-10 integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DataFormatError(ValueError):
    """Raised when an input file cannot be parsed into a dense matrix."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataSet:
    """A dense collection of feature vectors, optionally labeled.

    values is an (n, d) float64 matrix; truth_labels, when present, is a
    length-n integer vector of ground-truth class ids. Instances are
    immutable: the arrays are marked read-only on construction.
    """

    values: np.ndarray
    truth_labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"need at least one row and one column, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain NaN or Inf")
        object.__setattr__(self, "values", _readonly(values))
        if self.truth_labels is not None:
            labels = np.asarray(self.truth_labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise ValueError(
                    f"truth_labels has length {labels.shape}, expected ({values.shape[0]},)"
                )
            object.__setattr__(self, "truth_labels", _readonly(labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def load_dense_matrix(
    path, has_label_column: bool = False, skip_header: bool = False
) -> DataSet:
    """Load a CSV of decimals into a DataSet.

    Raises DataFormatError with the offending row (and column, for bad
    cells) on ragged or non-numeric input; 1-based positions, counting
    from the first data row.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if skip_header and lines:
        lines = lines[1:]
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise DataFormatError(f"{path}: no data rows")

    width = len(lines[0].split(","))
    rows = np.empty((len(lines), width), dtype=np.float64)
    for r, line in enumerate(lines):
        cells = line.split(",")
        if len(cells) != width:
            raise DataFormatError(
                f"{path}: ragged row {r + 1}: expected {width} columns, got {len(cells)}"
            )
        try:
            rows[r] = cells
        except ValueError:
            for c, cell in enumerate(cells):
                try:
                    float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: non-numeric cell at row {r + 1}, column {c + 1}: {cell!r}"
                    ) from None
            raise

    labels = None
    if has_label_column:
        if width < 2:
            raise DataFormatError(f"{path}: label column requested but only one column present")
        raw = rows[:, -1]
        labels = raw.astype(np.int64)
        if not np.array_equal(labels.astype(np.float64), raw):
            bad = int(np.nonzero(labels.astype(np.float64) != raw)[0][0])
            raise DataFormatError(f"{path}: non-integer label at row {bad + 1}")
        rows = rows[:, :-1]
    return DataSet(rows, labels)


def save_dense_matrix(data: DataSet, path, include_labels: bool = False) -> None:
    """Write a DataSet as CSV with round-trippable float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(data.n):
            cells = [repr(float(v)) for v in data.values[i]]
            if include_labels and data.truth_labels is not None:
                cells.append(str(int(data.truth_labels[i])))
            fh.write(",".join(cells))
            fh.write("\n")


def standardize(data: DataSet) -> DataSet:
    """Rescale each feature column to zero mean, unit variance.

    Columns that are constant (zero variance, up to float rounding) map to
    all-zeros instead of erroring. Requires n >= 2.
    """
    if data.n < 2:
        raise ValueError("standardize needs at least 2 samples")
    mean = data.values.mean(axis=0)
    std = data.values.std(axis=0)
    degenerate = std <= 1e-13 * np.maximum(1.0, np.abs(mean))
    safe_std = np.where(degenerate, 1.0, std)
    out = (data.values - mean) / safe_std
    out[:, degenerate] = 0.0
    return DataSet(out, data.truth_labels)


def generate_blobs(
    n_per_cluster: int, centers, spread: float, seed: int
) -> DataSet:
    """Isotropic Gaussian blobs around the given centers, labeled by center index."""
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.shape[0] < 1:
        raise ValueError("need at least one center")
    rng = np.random.default_rng(seed)
    parts, labels = [], []
    for idx, center in enumerate(centers):
        parts.append(center + spread * rng.standard_normal((n_per_cluster, centers.shape[1])))
        labels.append(np.full(n_per_cluster, idx, dtype=np.int64))
    return DataSet(np.vstack(parts), np.concatenate(labels))


def generate_rings(n_per_ring: int, radii, noise: float, seed: int) -> DataSet:
    """Concentric 2-D rings with radial Gaussian noise, labeled by ring index.

    Angles are evenly spaced with a seeded per-ring offset, so rings have
    no angular gaps; only the radius is perturbed.
    """
    radii = np.asarray(radii, dtype=np.float64)
    if radii.ndim != 1 or len(radii) < 1:
        raise ValueError("radii must be a non-empty 1-D sequence")
    if np.any(np.diff(radii) <= 0):
        raise ValueError(f"radii must be strictly increasing, got {radii.tolist()}")
    if noise < 0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)
    parts, labels = [], []
    for idx, radius in enumerate(radii):
        theta = 2.0 * np.pi * (np.arange(n_per_ring) + rng.uniform()) / n_per_ring
        r = radius + noise * rng.standard_normal(n_per_ring)
        parts.append(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))
        labels.append(np.full(n_per_ring, idx, dtype=np.int64))
    return DataSet(np.vstack(parts), np.concatenate(labels))
