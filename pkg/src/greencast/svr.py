"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual problem is solved by sequential minimal optimization over the 2n
coefficients (alpha_i, alpha_i*), picking the maximal-violating pair each
iteration. Predictions use the expansion f(x) = sum_i beta_i K(x_i, x) + b
with beta_i = alpha_i - alpha_i*.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, InsufficientDataError, NumericInputError


@dataclass(frozen=True)
class SvrConfig:
    C: float = 1.0  # margin/error trade-off
    gamma: float = 0.1  # RBF width
    epsilon: float = 0.1  # insensitive tube on normalized targets
    tolerance: float = 1e-3  # KKT slack at termination
    max_passes: int = 100_000  # cap on pair updates

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0 or self.epsilon < 0:
            raise ValueError("require C > 0, gamma > 0, epsilon >= 0")
        if self.tolerance <= 0 or self.max_passes < 1:
            raise ValueError("require tolerance > 0 and max_passes >= 1")


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray  # k x d
    coefficients: np.ndarray  # k, beta_i in [-C, C]
    bias: float
    config: SvrConfig
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "coefficients": self.coefficients.tolist(),
            "bias": self.bias,
            "converged": self.converged,
            "config": {
                "C": self.config.C,
                "gamma": self.config.gamma,
                "epsilon": self.config.epsilon,
                "tolerance": self.config.tolerance,
                "max_passes": self.config.max_passes,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrModel":
        return cls(
            np.asarray(d["support_vectors"], dtype=float),
            np.asarray(d["coefficients"], dtype=float),
            float(d["bias"]),
            SvrConfig(**d["config"]),
            bool(d["converged"]),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "SvrModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def rbf_kernel(x_i: np.ndarray, x_j: np.ndarray, gamma: float) -> float:
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.shape != x_j.shape:
        raise DimensionError(f"shape mismatch: {x_i.shape} vs {x_j.shape}")
    diff = x_i - x_j
    return float(np.exp(-gamma * np.dot(diff, diff)))


def kernel_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def fit_smo(X: np.ndarray, y: np.ndarray, config: SvrConfig) -> SvrModel:
    """Solve the epsilon-SVR dual by maximal-violating-pair SMO."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 2:
        raise InsufficientDataError("need at least 2 training points")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NumericInputError("non-finite training data")
    C, eps, tol = config.C, config.epsilon, config.tolerance

    K = kernel_matrix(X, X, config.gamma)
    # variables a[0:n] = alpha, a[n:2n] = alpha*; sign d = +1 / -1
    a = np.zeros(2 * n)
    d = np.concatenate([np.ones(n), -np.ones(n)])
    lin = np.concatenate([eps - y, eps + y])
    beta = np.zeros(n)
    g = np.zeros(n)  # K @ beta, maintained incrementally

    converged = False
    for _ in range(config.max_passes):
        G = d * np.concatenate([g, g]) + lin  # dual gradient wrt a
        score = -d * G
        up = (a < C - 1e-12) & (d > 0) | (a > 1e-12) & (d < 0)
        low = (a > 1e-12) & (d > 0) | (a < C - 1e-12) & (d < 0)
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        violation = score[i] - score[j]
        if violation < tol:
            converged = True
            break

        pi, pj = i % n, j % n
        # step lam >= 0 moves a[i] by +d[i]*lam, a[j] by -d[j]*lam,
        # i.e. beta[pi] += lam, beta[pj] -= lam
        eta = K[pi, pi] + K[pj, pj] - 2.0 * K[pi, pj] if pi != pj else 0.0
        lam = violation / max(eta, 1e-12)
        lam = min(lam, C - a[i] if d[i] > 0 else a[i])
        lam = min(lam, a[j] if d[j] > 0 else C - a[j])
        a[i] += d[i] * lam
        a[j] -= d[j] * lam
        if pi != pj:
            beta[pi] += lam
            beta[pj] -= lam
            g += lam * (K[:, pi] - K[:, pj])
        # pi == pj leaves beta unchanged (alpha and alpha* shrink together)

    bias = _bias_from_kkt(a[:n], a[n:], y, g, C, eps)
    keep = np.abs(beta) > 1e-12
    return SvrModel(X[keep].copy(), beta[keep].copy(), bias, config, converged)


def _bias_from_kkt(alpha, alpha_star, y, g, C, eps) -> float:
    """Midpoint of the bias interval implied by the box-state KKT conditions."""
    lo, hi = -np.inf, np.inf
    r = y - g
    free = ((alpha > 1e-9) & (alpha < C - 1e-9)) | (
        (alpha_star > 1e-9) & (alpha_star < C - 1e-9)
    )
    below_C = alpha < C - 1e-12
    if below_C.any():
        lo = max(lo, np.max(r[below_C]) - eps)
    active_star = alpha_star > 1e-12
    if active_star.any():
        lo = max(lo, np.max(r[active_star]) + eps)
    below_C_star = alpha_star < C - 1e-12
    if below_C_star.any():
        hi = min(hi, np.min(r[below_C_star]) + eps)
    active = alpha > 1e-12
    if active.any():
        hi = min(hi, np.min(r[active]) - eps)
    if free.any():
        # free coefficients pin the bias exactly (up to tolerance)
        ests = np.concatenate(
            [
                r[(alpha > 1e-9) & (alpha < C - 1e-9)] - eps,
                r[(alpha_star > 1e-9) & (alpha_star < C - 1e-9)] + eps,
            ]
        )
        return float(np.mean(ests))
    if not np.isfinite(lo):
        return float(hi) if np.isfinite(hi) else 0.0
    if not np.isfinite(hi):
        return float(lo)
    return float((lo + hi) / 2.0)


def predict(model: SvrModel, x: np.ndarray) -> float | np.ndarray:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if len(model.coefficients) == 0:
        out = np.full(len(pts), model.bias)
    else:
        if pts.shape[1] != model.support_vectors.shape[1]:
            raise DimensionError(
                f"expected {model.support_vectors.shape[1]} features, got {pts.shape[1]}"
            )
        Kx = kernel_matrix(pts, model.support_vectors, model.config.gamma)
        out = Kx @ model.coefficients + model.bias
    return float(out[0]) if single else out


def kkt_violation(model: SvrModel, X: np.ndarray, y: np.ndarray) -> float:
    """Maximum pointwise KKT violation of the fitted model on (X, y)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    C, eps = model.config.C, model.config.epsilon
    f = np.atleast_1d(predict(model, X))
    beta = np.zeros(len(y))
    if len(model.coefficients):
        # match training rows to retained support vectors
        for sv, coef in zip(model.support_vectors, model.coefficients):
            hit = np.where(np.all(np.isclose(X, sv, atol=0, rtol=0), axis=1))[0]
            if len(hit):
                beta[hit[0]] += coef
    alpha = np.maximum(beta, 0.0)
    alpha_star = np.maximum(-beta, 0.0)
    r = y - f  # positive residual means the alpha side is active
    worst = 0.0
    for i in range(len(y)):
        if alpha[i] < C - 1e-12:
            worst = max(worst, r[i] - eps)
        if alpha[i] > 1e-12:
            worst = max(worst, eps - r[i])
        if alpha_star[i] < C - 1e-12:
            worst = max(worst, -r[i] - eps)
        if alpha_star[i] > 1e-12:
            worst = max(worst, eps + r[i])
    return float(max(worst, 0.0))


def dual_objective(model: SvrModel, X: np.ndarray, y: np.ndarray) -> float:
    """Value of the minimized epsilon-SVR dual at the model's coefficients."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    beta = np.zeros(len(y))
    if len(model.coefficients):
        for sv, coef in zip(model.support_vectors, model.coefficients):
            hit = np.where(np.all(np.isclose(X, sv, atol=0, rtol=0), axis=1))[0]
            if len(hit):
                beta[hit[0]] += coef
    K = kernel_matrix(X, X, model.config.gamma)
    return float(
        0.5 * beta @ K @ beta
        + model.config.epsilon * np.sum(np.abs(beta))
        - y @ beta
    )


def with_config(config: SvrConfig, **overrides) -> SvrConfig:
    return replace(config, **overrides)
