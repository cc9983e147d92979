"""Stable equilibrium points of the kernel radius function.

Every data point is driven downhill on f(x) by gradient descent with a
backtracking line search until the gradient (almost) vanishes; the
landing points are deduplicated by single-linkage merging and each merged
group's mean becomes one stable equilibrium point (SEP). Clustering then
only has to label the handful of SEPs: each input point inherits the
label of its SEP. Because every point lands at a genuine interior minimum
of f, boundary-exterior points (BSVs) receive real cluster labels instead
of being discarded as outliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import iter_row_chunks, squared_distances
from ._unionfind import UnionFind
from .data import DataSet
from .labeling import AdjacencyParams, label_complete_graph
from .svdd import SvddModel, radius2, radius2_gradient

# give up shrinking the step once it underflows this fraction of step0
_MIN_STEP_FACTOR = 1e-18


@dataclass(frozen=True)
class DescentOptions:
    """Backtracking gradient-descent hyperparameters.

    step0=None resolves to 1/(4q), the natural scale set by the gradient
    prefactor of the Gaussian-kernel radius function.
    """

    step0: float | None = None
    max_iters: int = 500
    grad_tol: float = 1e-6
    shrink: float = 0.5

    def __post_init__(self):
        if self.step0 is not None and not self.step0 > 0:
            raise ValueError(f"step0 must be positive, got {self.step0}")
        if not 0 < self.shrink < 1:
            raise ValueError(f"shrink must be in (0, 1), got {self.shrink}")
        if not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    def resolve_step0(self, model: SvddModel) -> float:
        return self.step0 if self.step0 is not None else 1.0 / (4.0 * model.params.q)


@dataclass(frozen=True)
class SepSet:
    """Distinct equilibria plus the per-input assignment into them."""

    sep_points: np.ndarray
    assignment: np.ndarray
    merge_eps: float
    non_converged: int = 0

    @property
    def count(self) -> int:
        return len(self.sep_points)


def default_merge_eps(model: SvddModel) -> float:
    """Dedup radius: a fixed fraction of the kernel length scale 1/sqrt(q)."""
    return float(1e-2 / np.sqrt(model.params.q))


def _descend_batch(
    model: SvddModel, x0: np.ndarray, opts: DescentOptions, on_step=None
) -> tuple[np.ndarray, np.ndarray]:
    """Backtracking descent run simultaneously from every row of x0.

    Each trajectory is independent; batching is pure vectorization. The
    step resets to step0 every iteration and halves until f does not
    increase, so f along each trajectory is non-increasing by
    construction.
    """
    x = np.array(x0, dtype=np.float64)
    step0 = opts.resolve_step0(model)
    active = np.ones(len(x), dtype=bool)
    converged = np.zeros(len(x), dtype=bool)
    f = radius2(model, x)

    for _ in range(opts.max_iters):
        idx = np.nonzero(active)[0]
        if not len(idx):
            break
        grad = radius2_gradient(model, x[idx])
        gnorm = np.linalg.norm(grad, axis=1)
        done = gnorm <= opts.grad_tol
        converged[idx[done]] = True
        active[idx[done]] = False
        idx = idx[~done]
        if not len(idx):
            break
        grad = grad[~done]

        eta = np.full(len(idx), step0)
        trying = np.ones(len(idx), dtype=bool)
        new_x = np.empty_like(x[idx])
        new_f = np.empty(len(idx))
        while trying.any():
            sel = np.nonzero(trying)[0]
            cand = x[idx[sel]] - eta[sel, None] * grad[sel]
            cand_f = radius2(model, cand)
            ok = cand_f <= f[idx[sel]]
            new_x[sel[ok]] = cand[ok]
            new_f[sel[ok]] = cand_f[ok]
            trying[sel[ok]] = False
            eta[sel[~ok]] *= opts.shrink
            stuck = trying.copy()
            stuck[sel] &= eta[sel] < step0 * _MIN_STEP_FACTOR
            if stuck.any():
                # no decrease possible at underflow-scale steps: numerically
                # stationary, stop moving this trajectory
                new_x[stuck] = x[idx[stuck]]
                new_f[stuck] = f[idx[stuck]]
                trying[stuck] = False
                active[idx[stuck]] = False
        if __debug__:
            assert np.all(new_f <= f[idx] + 1e-12), "descent increased f"
        x[idx] = new_x
        f[idx] = new_f
        if on_step is not None:
            on_step(x.copy(), f.copy())

    # points still active at max_iters keep converged=False
    still = np.nonzero(active)[0]
    if len(still):
        gn = np.linalg.norm(radius2_gradient(model, x[still]), axis=1)
        converged[still] = gn <= opts.grad_tol
    return x, converged


def descend(model: SvddModel, x0, opts: DescentOptions, on_step=None) -> tuple[np.ndarray, bool]:
    """Gradient descent on f from a single start point.

    Returns the landing point and a convergence flag (gradient norm at or
    below grad_tol); f at the landing point never exceeds f(x0).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1:
        raise ValueError(f"x0 must be a single d-vector, got shape {x0.shape}")
    landed, conv = _descend_batch(model, x0[None, :], opts, on_step=on_step)
    return landed[0], bool(conv[0])


def find_seps(
    model: SvddModel, points: DataSet, opts: DescentOptions, merge_eps: float
) -> SepSet:
    """Descend from every input point and merge the landings into SEPs.

    Landing points within merge_eps are merged transitively (single
    linkage, ascending-index order); each SEP is the mean of its landing
    group. Non-converged descents are kept and counted rather than
    dropped, so every input always has a SEP.
    """
    if not merge_eps > 0:
        raise ValueError(f"merge_eps must be positive, got {merge_eps}")
    landings, conv = _descend_batch(model, points.values, opts)

    n = len(landings)
    uf = UnionFind(n)
    eps2 = merge_eps * merge_eps
    for start, stop in iter_row_chunks(n, 512):
        d2 = squared_distances(landings[start:stop], landings)
        close_i, close_j = np.nonzero(d2 <= eps2)
        for i, j in zip(close_i.tolist(), close_j.tolist()):
            uf.union(start + i, j)
    groups = uf.labels()

    count = int(groups.max()) + 1
    seps = np.zeros((count, points.d))
    np.add.at(seps, groups, landings)
    sizes = np.bincount(groups, minlength=count).astype(np.float64)
    seps /= sizes[:, None]
    return SepSet(
        sep_points=seps,
        assignment=groups,
        merge_eps=merge_eps,
        non_converged=int((~conv).sum()),
    )


def sep_svc(
    model: SvddModel,
    points: DataSet,
    opts: DescentOptions,
    merge_eps: float,
    adj: AdjacencyParams,
) -> np.ndarray:
    """SEP-based clustering: label the SEPs, then propagate to the inputs."""
    seps = find_seps(model, points, opts, merge_eps)
    sep_labels = label_seps(model, seps, adj)
    return sep_labels[seps.assignment]


def label_seps(model: SvddModel, seps: SepSet, adj: AdjacencyParams) -> np.ndarray:
    """Complete-graph labeling restricted to the SEP points; never -1.

    SEPs sit at interior minima of f, so outliers are not expected; if a
    degenerate model still pushes a SEP outside the sphere it is attached
    to the nearest labeled SEP, and if every SEP is exterior each becomes
    its own singleton cluster.
    """
    sep_data = DataSet(seps.sep_points)
    labels = label_complete_graph(model, sep_data, adj, assign_outliers=True)
    missing = labels < 0
    if missing.any():
        labels = labels.copy()
        base = labels.max() + 1
        labels[missing] = base + np.arange(int(missing.sum()))
    return labels


def save_sep_csv(seps: SepSet, points_path, assignment_path) -> None:
    """Dump SEP coordinates and the per-input assignment for inspection."""
    np.savetxt(points_path, seps.sep_points, delimiter=",")
    np.savetxt(assignment_path, seps.assignment, fmt="%d")
