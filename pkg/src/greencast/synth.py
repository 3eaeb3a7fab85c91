"""Seeded synthetic greenhouse data.

Produces hourly microclimate series plus either a stem-diameter trace
(ficus scenario) or weekly cumulative yield (tomato scenario). Plant
responses carry planted, lagged dependencies on the microclimate so the
one-step-ahead benchmark is solvable by construction. Everything is a
pure function of the config.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError
from .timeseries import TimeSeriesTable

SCENARIOS = ("ficus_sdv", "tomato_yield")

ENV_COLUMNS = ("co2", "humidity", "radiation", "temp_in", "temp_out")

_START = np.datetime64("2021-03-01T00:00:00", "s")


@dataclass(frozen=True)
class SynthConfig:
    days: int
    seed: int
    scenario: str
    noise_level: float = 0.05
    dependency_lag: int = 3  # days between microclimate and yield response

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.noise_level < 0:
            raise ConfigError("noise_level must be >= 0")
        if self.dependency_lag < 1:
            raise ConfigError("dependency_lag must be >= 1")
        if self.days < 2:
            raise ConfigError("days must be >= 2")
        if self.scenario == "tomato_yield" and self.days < 14:
            raise ConfigError("tomato_yield needs >= 14 days (2 weekly points)")


@dataclass(frozen=True)
class SynthDataset:
    hourly: TimeSeriesTable
    weekly_yield: TimeSeriesTable | None = None  # tomato scenario only


def generate(config: SynthConfig) -> SynthDataset:
    rng = np.random.default_rng(config.seed)
    n = 24 * config.days
    hours = np.arange(n)
    hod = hours % 24
    day = hours // 24

    # day-to-day amplitude variation shared by radiation and plant response
    day_amp = 1.0 + 0.25 * np.sin(2 * np.pi * day / 19.0) + 0.10 * np.sin(
        2 * np.pi * day / 7.3
    )
    diurnal = np.clip(np.sin(np.pi * (hod - 6) / 12.0), 0.0, None)

    radiation = 650.0 * day_amp * diurnal
    temp_out = (
        12.0
        + 6.0 * np.sin(2 * np.pi * (hod - 9) / 24.0)
        + 2.0 * np.sin(2 * np.pi * day / 23.0)
    )
    temp_in_raw = 16.0 + 0.012 * radiation + 0.4 * temp_out
    temp_in = pd.Series(temp_in_raw).ewm(alpha=0.2, adjust=False).mean().to_numpy()
    co2 = 420.0 + 160.0 * (1.0 - diurnal) + 40.0 * np.sin(2 * np.pi * day / 11.0)
    humidity = 70.0 + 12.0 * np.sin(2 * np.pi * (hod + 3) / 24.0) - 5.0 * day_amp

    def noisy(x):
        if config.noise_level == 0:
            return x.copy()
        span = x.max() - x.min()
        return x + rng.normal(0.0, config.noise_level * span, n)

    cols = {
        "co2": np.clip(noisy(co2), 200.0, 1500.0),
        "humidity": np.clip(noisy(humidity), 0.0, 100.0),
        "radiation": np.clip(noisy(radiation), 0.0, None),
        "temp_in": noisy(temp_in),
        "temp_out": noisy(temp_out),
    }

    ts = _START + (hours * 3600).astype("timedelta64[s]")

    if config.scenario == "ficus_sdv":
        # the stem always thickens, but its hourly rate dips around midday
        # (shrink/recovery cycle) with day-to-day amplitude modulation; the
        # dip never cancels the baseline growth, so the hourly variation
        # stays strictly positive
        rate = (
            0.012
            + 0.0005 * day  # the plant thickens faster as it ages
            - 0.006 * day_amp * np.cos(2 * np.pi * (hod - 14) / 24.0)
        )
        stem = 8.0 + np.cumsum(rate)
        if config.noise_level > 0:
            # sensor drift: a random walk on the diameter reading, so the
            # hourly first differences see i.i.d. noise scaled to the
            # typical variability of the growth rate
            stem = stem + np.cumsum(
                rng.normal(0.0, config.noise_level * rate.std(), n)
            )
        cols["stem_diameter"] = stem
        return SynthDataset(TimeSeriesTable(ts, cols, "hourly"))

    hourly = TimeSeriesTable(ts, cols, "hourly")
    weekly = _weekly_yield(config, radiation, temp_in, rng)
    return SynthDataset(hourly, weekly)


def _weekly_yield(
    config: SynthConfig, radiation: np.ndarray, temp_in: np.ndarray, rng
) -> TimeSeriesTable:
    """Cumulative weekly harvest driven by a lagged radiation-temperature sum."""
    increments = weekly_assimilation(config, radiation, temp_in)
    growth = 6.0 * increments / (60.0 + increments)  # mildly saturating, kg/week
    if config.noise_level > 0:
        span = growth.max() - growth.min()
        growth = growth + rng.normal(0.0, config.noise_level * span, len(growth))
    growth = np.clip(growth, 0.0, None)  # keeps the cumulative non-decreasing
    cumulative = np.cumsum(growth) + 1.0
    n_weeks = len(growth)
    ts = _START + (np.arange(1, n_weeks + 1) * 7 * 24 * 3600).astype("timedelta64[s]")
    return TimeSeriesTable(ts, {"yield": cumulative}, "weekly")


def weekly_assimilation(
    config: SynthConfig, radiation: np.ndarray, temp_in: np.ndarray
) -> np.ndarray:
    """The planted driver: per-week lagged sum of radiation x temperature response.

    Week w (measured at the end of day 7w) integrates the hours of the week
    ending dependency_lag days earlier. Exposed so tests can verify the
    planted dependency directly.
    """
    assim = (radiation / 650.0) * np.exp(-(((temp_in - 22.0) / 8.0) ** 2))
    n_weeks = config.days // 7
    lag_h = config.dependency_lag * 24
    out = np.empty(n_weeks)
    for w in range(1, n_weeks + 1):
        end = 7 * 24 * w - lag_h
        start = max(end - 7 * 24, 0)
        out[w - 1] = assim[start:end].sum() if end > 0 else 0.0
    return out


def yield_increments(weekly_cumulative: np.ndarray) -> np.ndarray:
    """Per-week harvest rate recovered from the cumulative series."""
    c = np.asarray(weekly_cumulative, dtype=float)
    return np.diff(np.concatenate([[1.0], c]))
