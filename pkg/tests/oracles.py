"""Independent brute-force oracles used to cross-check the real solvers.

These deliberately avoid sharing code with the package: the SVR dual is
solved by projected gradient descent, CART splits are found by direct
enumeration, and kernel/SSE values are computed from definitions.
"""

from __future__ import annotations

import numpy as np


def rbf(a, b, gamma):
    diff = np.asarray(a, float) - np.asarray(b, float)
    return np.exp(-gamma * np.dot(diff, diff))


def kernel(X, gamma):
    n = len(X)
    return np.array([[rbf(X[i], X[j], gamma) for j in range(n)] for i in range(n)])


def svr_dual_projected_gradient(X, y, C, gamma, epsilon, iters=40000):
    """Solve the epsilon-SVR dual over (alpha, alpha*) by projected gradient.

    Returns (beta, bias, objective).
    """
    X = np.atleast_2d(np.asarray(X, float))
    y = np.asarray(y, float)
    n = len(y)
    K = kernel(X, gamma)
    d = np.concatenate([np.ones(n), -np.ones(n)])
    Kbig = np.tile(K, (2, 2))
    Q = np.outer(d, d) * Kbig
    p = np.concatenate([epsilon - y, epsilon + y])

    lip = np.linalg.eigvalsh(Q).max() + 1e-9
    step = 1.0 / lip

    def project(v):
        # onto {0 <= a <= C, d.a = 0} by bisection on the multiplier
        lo, hi = -1e6, 1e6
        for _ in range(200):
            lam = (lo + hi) / 2
            a = np.clip(v - lam * d, 0.0, C)
            s = d @ a
            if s > 0:
                lo = lam
            else:
                hi = lam
        return np.clip(v - (lo + hi) / 2 * d, 0.0, C)

    a = project(np.zeros(2 * n))
    for _ in range(iters):
        grad = Q @ a + p
        a_new = project(a - step * grad)
        if np.max(np.abs(a_new - a)) < 1e-12:
            a = a_new
            break
        a = a_new

    alpha, alpha_star = a[:n], a[n:]
    beta = alpha - alpha_star
    g = K @ beta
    obj = 0.5 * beta @ K @ beta + epsilon * np.sum(alpha + alpha_star) - y @ beta

    free = ((alpha > 1e-7) & (alpha < C - 1e-7)) | (
        (alpha_star > 1e-7) & (alpha_star < C - 1e-7)
    )
    if free.any():
        ests = []
        for i in range(n):
            if 1e-7 < alpha[i] < C - 1e-7:
                ests.append(y[i] - epsilon - g[i])
            if 1e-7 < alpha_star[i] < C - 1e-7:
                ests.append(y[i] + epsilon - g[i])
        bias = float(np.mean(ests))
    else:
        lo, hi = -np.inf, np.inf
        for i in range(n):
            r = y[i] - g[i]
            if alpha[i] < C - 1e-9:
                lo = max(lo, r - epsilon)
            if alpha_star[i] > 1e-9:
                lo = max(lo, r + epsilon)
            if alpha_star[i] < C - 1e-9:
                hi = min(hi, r + epsilon)
            if alpha[i] > 1e-9:
                hi = min(hi, r - epsilon)
        bias = float((lo + hi) / 2) if np.isfinite(lo) and np.isfinite(hi) else 0.0
    return beta, bias, float(obj)


def svr_oracle_predict(X_train, beta, bias, gamma, points):
    points = np.atleast_2d(np.asarray(points, float))
    return np.array(
        [sum(beta[i] * rbf(X_train[i], x, gamma) for i in range(len(beta))) + bias for x in points]
    )


def _sse(vals):
    vals = np.asarray(vals, float)
    return float(((vals - vals.mean()) ** 2).sum()) if len(vals) else 0.0


def exhaustive_cart_sse(X, y, depth_cap, min_leaf=1):
    """Training SSE of a greedy CART tree found by direct enumeration.

    Every (feature, midpoint-threshold) candidate is scored from the
    definition; ties go to the first candidate in (feature, threshold)
    order, matching the documented tie rule.
    """
    X = np.atleast_2d(np.asarray(X, float))
    y = np.asarray(y, float)
    here = _sse(y)
    if depth_cap == 0 or len(y) < 2 * min_leaf or here <= 1e-15:
        return here
    best = None
    for feat in range(X.shape[1]):
        vs = np.unique(X[:, feat])
        for k in range(len(vs) - 1):
            thr = (vs[k] + vs[k + 1]) / 2.0
            mask = X[:, feat] <= thr
            if mask.sum() < min_leaf or (~mask).sum() < min_leaf:
                continue
            split_sse = _sse(y[mask]) + _sse(y[~mask])
            if best is None or split_sse < best[0]:
                best = (split_sse, feat, thr)
    if best is None:
        return here
    _, feat, thr = best
    mask = X[:, feat] <= thr
    return exhaustive_cart_sse(X[mask], y[mask], depth_cap - 1, min_leaf) + exhaustive_cart_sse(
        X[~mask], y[~mask], depth_cap - 1, min_leaf
    )


def lstm_numeric_gradient(loss_fn, tensor, eps=1e-5, coords=None, rng=None):
    """Central finite differences of loss_fn() wrt in-place tensor entries."""
    flat = tensor.reshape(-1)
    if coords is None:
        coords = range(flat.size)
    grads = {}
    for k in coords:
        orig = flat[k]
        flat[k] = orig + eps
        hi = loss_fn()
        flat[k] = orig - eps
        lo = loss_fn()
        flat[k] = orig
        grads[k] = (hi - lo) / (2 * eps)
    return grads
