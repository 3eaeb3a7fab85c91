"""Relative and absolute error metrics for prediction evaluation.

The relative forms divide each residual by the actual value before
aggregation; points where the actual value is (numerically) zero are
excluded from the mean and counted separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UndefinedMetricError

ZERO_GUARD = 1e-12


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    variant: str  # "relative" | "absolute"
    n: int
    guard_count: int = 0

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "rmse": self.rmse,
            "mae": self.mae,
            "variant": self.variant,
            "n": self.n,
            "guard_count": self.guard_count,
        }


def _aligned(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float)
    f = np.asarray(predicted, dtype=float)
    if a.shape != f.shape or a.ndim != 1:
        raise DimensionError(f"shape mismatch: {a.shape} vs {f.shape}")
    return a, f


def _guarded(actual, predicted) -> tuple[np.ndarray, np.ndarray, int]:
    a, f = _aligned(actual, predicted)
    keep = np.abs(a) >= ZERO_GUARD
    guard_count = int((~keep).sum())
    if keep.sum() == 0:
        raise UndefinedMetricError("every point excluded by the zero guard")
    return a[keep], f[keep], guard_count


def relative_mse(actual, predicted) -> float:
    """Mean of ((A_t - F_t)/A_t)^2 over unguarded points."""
    a, f, _ = _guarded(actual, predicted)
    return float(np.mean(((a - f) / a) ** 2))


def relative_mae(actual, predicted) -> float:
    """Mean of |A_t - F_t| / |A_t| over unguarded points."""
    a, f, _ = _guarded(actual, predicted)
    return float(np.mean(np.abs(a - f) / np.abs(a)))


def relative_rmse(actual, predicted) -> float:
    return float(np.sqrt(relative_mse(actual, predicted)))


def relative_report(actual, predicted) -> MetricsReport:
    a, f, guard_count = _guarded(actual, predicted)
    mse = float(np.mean(((a - f) / a) ** 2))
    mae = float(np.mean(np.abs(a - f) / np.abs(a)))
    return MetricsReport(mse, float(np.sqrt(mse)), mae, "relative", len(a), guard_count)


def absolute_variants(actual, predicted) -> MetricsReport:
    """Standard (unscaled) MSE/RMSE/MAE; no denominator, no guard."""
    a, f = _aligned(actual, predicted)
    if len(a) == 0:
        raise UndefinedMetricError("empty series")
    mse = float(np.mean((a - f) ** 2))
    mae = float(np.mean(np.abs(a - f)))
    return MetricsReport(mse, float(np.sqrt(mse)), mae, "absolute", len(a), 0)
