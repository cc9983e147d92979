"""Minimal enclosing hypersphere in Gaussian-kernel feature space (SVDD).

The dual problem

    maximize  W = sum_j beta_j K(x_j, x_j) - sum_ij beta_i beta_j K(x_i, x_j)
    s.t.      0 <= beta_j <= C,  sum_j beta_j = 1

is solved by pairwise coordinate ascent (SMO-style): the maximally
KKT-violating pair of coefficients is optimized analytically under the
frozen-sum constraint with box clipping, repeated until the violation
drops below tolerance. With the Gaussian kernel K(x, x) = 1, so W = 1 -
beta' K beta and ascent on W is descent on the quadratic form.

The trained model exposes the kernel radius function

    f(x) = K(x, x) - 2 sum_j beta_j K(x_j, x) + sum_ij beta_i beta_j K(x_i, x_j),

the squared feature-space distance from x to the sphere center, and its
analytic gradient 4 q sum_j beta_j (x - x_j) exp(-q ||x - x_j||^2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._numeric import iter_row_chunks, squared_distances
from .data import DataSet

# beta-space tolerance for classifying Inside / SV / BSV
BETA_TOL = 1e-6
# default Gram-matrix cache cutoff; above this, kernel columns are
# recomputed on the fly (O(n d) per step instead of O(n^2) memory)
GRAM_CACHE_LIMIT = 4096
_SWEEP_MIN_INTERVAL = 50

INSIDE, SV, BSV = "Inside", "SV", "BSV"


@dataclass(frozen=True)
class KernelParams:
    """Gaussian kernel width q (K = exp(-q ||x_i - x_j||^2)) and box bound C."""

    q: float
    C: float = 1.0

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError(f"kernel width q must be positive, got {self.q}")
        if not 0 < self.C <= 1:
            raise ValueError(f"box bound C must be in (0, 1], got {self.C}")


@dataclass(frozen=True)
class SvddModel:
    """Trained dual solution plus cached quantities for evaluating f(x)."""

    beta: np.ndarray
    train_points: DataSet
    params: KernelParams
    r_squared: float
    center_norm2: float  # beta' K beta, the constant tail of f(x)
    converged: bool
    kkt_violation: float
    sv_indices: np.ndarray = field(repr=False, default=None)
    bsv_indices: np.ndarray = field(repr=False, default=None)
    inside_indices: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        roles = _roles(beta, self.params.C)
        object.__setattr__(self, "sv_indices", np.nonzero(roles == 1)[0])
        object.__setattr__(self, "bsv_indices", np.nonzero(roles == 2)[0])
        object.__setattr__(self, "inside_indices", np.nonzero(roles == 0)[0])
        support = beta > 0.0
        object.__setattr__(self, "_support_x", self.train_points.values[support])
        object.__setattr__(self, "_support_beta", beta[support])

    @property
    def dual_objective(self) -> float:
        return 1.0 - self.center_norm2

    @property
    def n(self) -> int:
        return self.train_points.n

    @property
    def d(self) -> int:
        return self.train_points.d


def _roles(beta: np.ndarray, C: float) -> np.ndarray:
    roles = np.zeros(len(beta), dtype=np.int8)  # 0 inside, 1 sv, 2 bsv
    roles[beta > BETA_TOL] = 1
    roles[beta >= C - BETA_TOL] = 2
    return roles


def point_role(model: SvddModel, i: int) -> str:
    """Classify training point i as Inside (beta ~ 0), SV, or BSV (beta ~ C)."""
    if not 0 <= i < model.n:
        raise IndexError(f"training index {i} out of range [0, {model.n})")
    return (INSIDE, SV, BSV)[_roles(model.beta[i : i + 1], model.params.C)[0]]


class _KernelOracle:
    """Kernel column access with optional full Gram caching."""

    def __init__(self, x: np.ndarray, q: float, cache_limit: int):
        self.x = x
        self.q = q
        self.gram = None
        if len(x) <= cache_limit:
            self.gram = np.exp(-q * squared_distances(x, x))

    def column(self, i: int) -> np.ndarray:
        if self.gram is not None:
            return self.gram[:, i]
        d2 = np.einsum("ij,ij->i", self.x - self.x[i], self.x - self.x[i])
        return np.exp(-self.q * d2)

    def entry(self, i: int, j: int) -> float:
        if self.gram is not None:
            return float(self.gram[i, j])
        diff = self.x[i] - self.x[j]
        return float(np.exp(-self.q * (diff @ diff)))

    def matvec(self, beta: np.ndarray) -> np.ndarray:
        if self.gram is not None:
            return self.gram @ beta
        out = np.zeros(len(self.x))
        for start, stop in iter_row_chunks(len(self.x), 1024):
            k_rows = np.exp(-self.q * squared_distances(self.x[start:stop], self.x))
            out[start:stop] = k_rows @ beta
        return out


def _pair_step(beta, g, a, b, C, kernel: _KernelOracle) -> float:
    """Transfer mass from b to a along the frozen-sum direction; returns the step."""
    t_max = min(C - beta[a], beta[b])
    if t_max <= 0.0:
        return 0.0
    gap = g[b] - g[a]
    if gap <= 0.0:
        return 0.0
    eta = 2.0 * (1.0 - kernel.entry(a, b))
    t = t_max if eta <= 1e-15 else min(gap / eta, t_max)
    if __debug__:
        predicted = -2.0 * t * gap + t * t * eta
        assert predicted <= 1e-12, f"pairwise step would increase the quadratic: {predicted}"
    if t == t_max:
        # snap the binding coefficient to its exact bound
        if C - beta[a] <= beta[b]:
            beta[b] -= C - beta[a]
            beta[a] = C
        else:
            beta[a] += beta[b]
            beta[b] = 0.0
    else:
        beta[a] += t
        beta[b] -= t
    g += t * (kernel.column(a) - kernel.column(b))
    return t


def _extreme_pair(beta, g, C):
    """(receiver, giver, violation): the maximally KKT-violating pair.

    Violation is measured in f-units: f differs from -2 g by a constant,
    so the gap between the best receiver (smallest g among beta < C) and
    the best giver (largest g among beta > 0) is 2 (g_giver - g_receiver).
    Ties resolve to the lowest index.
    """
    can_receive = beta < C
    can_give = beta > 0.0
    if not can_receive.any() or not can_give.any():
        return -1, -1, 0.0
    a = int(np.argmin(np.where(can_receive, g, np.inf)))
    b = int(np.argmax(np.where(can_give, g, -np.inf)))
    return a, b, 2.0 * (g[b] - g[a])


def train(
    data: DataSet,
    params: KernelParams,
    tol: float = 1e-4,
    max_passes: int = 200,
    gram_cache_limit: int = GRAM_CACHE_LIMIT,
) -> SvddModel:
    """Solve the SVDD dual on data; returns the trained model.

    One pass is n pairwise updates. Training stops when the maximum KKT
    violation (in f-units) is at most tol, or after max_passes passes, in
    which case the model carries converged=False. C < 1/n is rejected:
    the simplex constraint would be infeasible.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = data.n
    C = params.C
    if C < 1.0 / n:
        raise ValueError(f"C={C} is infeasible for n={n}: sum(beta)=1 needs C >= 1/n")

    kernel = _KernelOracle(data.values, params.q, gram_cache_limit)
    beta = np.full(n, 1.0 / n)
    g = kernel.matvec(beta)

    max_steps = max_passes * n
    sweep_interval = max(_SWEEP_MIN_INTERVAL, n)
    steps = 0
    converged = False
    while True:
        a, b, violation = _extreme_pair(beta, g, C)
        if violation <= tol:
            # confirm on an exactly recomputed gradient; the incremental
            # updates accumulate rounding drift
            g = kernel.matvec(beta)
            a, b, violation = _extreme_pair(beta, g, C)
            if violation <= tol:
                converged = True
                break
        if steps >= max_steps:
            break
        if steps % sweep_interval == sweep_interval - 1:
            _full_sweep(beta, g, C, kernel)
        else:
            _pair_step(beta, g, a, b, C, kernel)
        steps += 1

    if not converged:
        g = kernel.matvec(beta)
        _, _, violation = _extreme_pair(beta, g, C)
    center_norm2 = float(beta @ g)
    f_train = 1.0 - 2.0 * g + center_norm2

    roles = _roles(beta, C)
    if (roles == 1).any():
        r_squared = float(np.mean(f_train[roles == 1]))
    elif (roles == 0).any():
        # no strict SVs: the tightest radius consistent with the interior points
        r_squared = float(np.max(f_train[roles == 0]))
    else:
        # every point saturates the box; any radius is dual-feasible, and the
        # degenerate sphere makes them all boundary-exterior, matching their role
        r_squared = 0.0

    return SvddModel(
        beta=beta,
        train_points=data,
        params=params,
        r_squared=r_squared,
        center_norm2=center_norm2,
        converged=converged,
        kkt_violation=float(max(violation, 0.0)),
    )


def _full_sweep(beta, g, C, kernel: _KernelOracle) -> int:
    """Try the best available partner for every index; guarantees progress

    even if the global heuristic pair repeats with negligible steps.
    """
    n = len(beta)
    updates = 0
    for i in range(n):
        if beta[i] < C:
            can_give = beta > 0.0
            can_give[i] = False
            if can_give.any():
                b = int(np.argmax(np.where(can_give, g, -np.inf)))
                if _pair_step(beta, g, i, b, C, kernel) > 0.0:
                    updates += 1
        if beta[i] > 0.0:
            can_receive = beta < C
            can_receive[i] = False
            if can_receive.any():
                a = int(np.argmin(np.where(can_receive, g, np.inf)))
                if _pair_step(beta, g, a, i, C, kernel) > 0.0:
                    updates += 1
    return updates


def _check_query(model: SvddModel, x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != model.d:
        raise ValueError(f"query dimension {pts.shape[1]} != training dimension {model.d}")
    return pts, single


def radius2(model: SvddModel, x) -> float | np.ndarray:
    """Kernel radius f(x): squared feature-space distance to the sphere center.

    Accepts a single d-vector or an (m, d) batch. Only coefficients with
    beta > 0 contribute, so evaluation scales with the support size.
    """
    pts, single = _check_query(model, x)
    k = np.exp(-model.params.q * squared_distances(pts, model._support_x))
    f = 1.0 - 2.0 * (k @ model._support_beta) + model.center_norm2
    return float(f[0]) if single else f


def radius2_gradient(model: SvddModel, x) -> np.ndarray:
    """Analytic gradient of f: 4 q sum_j beta_j (x - x_j) exp(-q ||x - x_j||^2)."""
    pts, single = _check_query(model, x)
    q = model.params.q
    k = np.exp(-model.params.q * squared_distances(pts, model._support_x))
    kb = k * model._support_beta
    grad = 4.0 * q * (kb.sum(axis=1)[:, None] * pts - kb @ model._support_x)
    return grad[0] if single else grad


def suggest_q(data: DataSet, subsample_limit: int = 2000, seed: int = 0) -> float:
    """Bandwidth heuristic: 1 / (2 * median squared pairwise distance).

    Uses a seeded subsample of at most subsample_limit points. Fails if
    the median distance is zero (all points coincide).
    """
    if data.n < 2:
        raise ValueError("suggest_q needs at least 2 points")
    x = data.values
    if data.n > subsample_limit:
        idx = np.sort(np.random.default_rng(seed).choice(data.n, subsample_limit, replace=False))
        x = x[idx]
    d2 = squared_distances(x, x)
    med = float(np.median(d2[np.triu_indices(len(x), k=1)]))
    if med <= 0.0:
        raise ValueError("median pairwise distance is zero; cannot pick a kernel width")
    return 1.0 / (2.0 * med)


def save_model(model: SvddModel, path) -> None:
    """Serialize the model as JSON (beta, kernel params, radius, training points)."""
    payload = {
        "schema_version": 1,
        "q": model.params.q,
        "C": model.params.C,
        "r_squared": model.r_squared,
        "center_norm2": model.center_norm2,
        "converged": model.converged,
        "kkt_violation": model.kkt_violation,
        "beta": model.beta.tolist(),
        "train_points": model.train_points.values.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path) -> SvddModel:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return SvddModel(
        beta=np.asarray(payload["beta"], dtype=np.float64),
        train_points=DataSet(np.asarray(payload["train_points"], dtype=np.float64)),
        params=KernelParams(q=payload["q"], C=payload["C"]),
        r_squared=payload["r_squared"],
        center_norm2=payload["center_norm2"],
        converged=payload["converged"],
        kkt_violation=payload["kkt_violation"],
    )
