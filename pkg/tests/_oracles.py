"""Independent reference implementations used to check the real code.

These deliberately avoid the library's solver paths: the dual QP oracle
is accelerated projected gradient on the capped simplex, and the mutual
information oracle works from raw probability definitions.
"""

from __future__ import annotations

import math

import numpy as np


def project_capped_simplex(v: np.ndarray, cap: float) -> np.ndarray:
    """Euclidean projection onto {0 <= b <= cap, sum(b) = 1}.

    S(tau) = sum(clip(v - tau, 0, cap)) is piecewise linear and
    non-increasing with breakpoints at v_i and v_i - cap; the crossing
    S(tau) = 1 is located exactly by scanning the sorted breakpoints.
    """
    bp = np.sort(np.concatenate([v, v - cap]))
    svals = np.clip(v[None, :] - bp[:, None], 0.0, cap).sum(axis=1)
    # svals[0] = n*cap >= 1 (cap >= 1/n), svals[-1] = 0: a crossing exists
    j = int(np.searchsorted(-svals, -1.0)) - 1
    j = max(0, min(j, len(bp) - 2))
    s_lo, s_hi = svals[j], svals[j + 1]
    if s_lo == s_hi:
        tau = bp[j]
    else:
        tau = bp[j] + (s_lo - 1.0) * (bp[j + 1] - bp[j]) / (s_lo - s_hi)
    return np.clip(v - tau, 0.0, cap)


def _fista_rounds(kernel, cap, beta, lip, iters):
    y = beta.copy()
    t_acc = 1.0
    for _ in range(iters):
        grad = 2.0 * (kernel @ y)
        new_beta = project_capped_simplex(y - grad / lip, cap)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        momentum = ((t_acc - 1.0) / t_next) * (new_beta - beta)
        y = new_beta + momentum
        beta, t_acc = new_beta, t_next
    return beta


def _kkt_ok(kernel, cap, beta, tol=1e-7):
    if abs(beta.sum() - 1.0) > 1e-9 or beta.min() < -1e-10 or beta.max() > cap + 1e-10:
        return False
    g2 = 2.0 * (kernel @ beta)
    free = (beta > 1e-9) & (beta < cap - 1e-9)
    lam = float(np.median(g2[free])) if free.any() else None
    if lam is not None and np.max(np.abs(g2[free] - lam)) > tol:
        return False
    if lam is None:
        lam = float(np.median(g2))
    lower = beta <= 1e-9
    upper = beta >= cap - 1e-9
    return bool(np.all(g2[lower] >= lam - tol) and np.all(g2[upper] <= lam + tol))


def _polish_active_set(kernel, cap, beta):
    """Solve the equality-constrained QP restricted to the current face."""
    n = len(beta)
    at_lower = beta <= 1e-6
    at_upper = beta >= cap - 1e-6
    free = ~(at_lower | at_upper)
    out = np.where(at_upper, cap, 0.0)
    budget = 1.0 - cap * at_upper.sum()
    if not free.any():
        return out if abs(budget) < 1e-9 else beta
    kff = kernel[np.ix_(free, free)]
    rhs_lin = -2.0 * kernel[np.ix_(free, at_upper)].sum(axis=1) * cap
    m = free.sum()
    system = np.zeros((m + 1, m + 1))
    system[:m, :m] = 2.0 * kff
    system[:m, m] = 1.0
    system[m, :m] = 1.0
    rhs = np.concatenate([rhs_lin, [budget]])
    sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    out[free] = np.clip(sol[:m], 0.0, cap)
    total = out.sum()
    if abs(total - 1.0) > 1e-12 and total > 0:
        out = out / total
    return out


def solve_dual_pg(kernel: np.ndarray, cap: float, rounds: int = 10):
    """Minimize b' K b over the capped simplex; returns (beta, W).

    Accelerated projected gradient identifies the active face, which an
    exact equality-constrained solve then polishes; the KKT conditions of
    the polished point are verified before accepting it. W = 1 - b' K b
    matches the hypersphere dual objective for a kernel with unit
    diagonal.
    """
    n = kernel.shape[0]
    lip = 2.0 * max(float(np.linalg.eigvalsh(kernel).max()), 1e-12)
    beta = project_capped_simplex(np.full(n, 1.0 / n), cap)
    best = beta
    best_q = float(beta @ kernel @ beta)
    for _ in range(rounds):
        beta = _fista_rounds(kernel, cap, beta, lip, 600)
        polished = _polish_active_set(kernel, cap, beta)
        for candidate in (polished, beta):
            q_val = float(candidate @ kernel @ candidate)
            if q_val < best_q:
                best, best_q = candidate, q_val
        if _kkt_ok(kernel, cap, best):
            break
        beta = best
    return best, 1.0 - best_q


def gaussian_gram(x: np.ndarray, q: float) -> np.ndarray:
    sq = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2)
    return np.exp(-q * sq)


def mutual_info_nmi(pred, truth) -> float:
    """NMI from probability definitions: MI / sqrt(H_pred * H_truth)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    n = len(pred)
    p_vals = sorted(set(pred.tolist()))
    t_vals = sorted(set(truth.tolist()))
    p_prob = {v: float(np.sum(pred == v)) / n for v in p_vals}
    t_prob = {v: float(np.sum(truth == v)) / n for v in t_vals}
    h_p = -sum(p * math.log(p) for p in p_prob.values() if p > 0)
    h_t = -sum(p * math.log(p) for p in t_prob.values() if p > 0)
    if h_p == 0.0 or h_t == 0.0:
        return 1.0 if h_p == h_t else 0.0
    mi = 0.0
    for a in p_vals:
        for b in t_vals:
            joint = float(np.sum((pred == a) & (truth == b))) / n
            if joint > 0:
                mi += joint * math.log(joint / (p_prob[a] * t_prob[b]))
    return mi / math.sqrt(h_p * h_t)
