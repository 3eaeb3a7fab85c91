"""Greenhouse time-series preparation.

Covers ingestion of raw sensor CSVs, cleaning, hourly-to-daily averaging,
weekly-to-daily interpolation, stem-diameter variation, min-max scaling,
sliding-window supervised datasets and the chronological 60/15/25 split.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
import pandas as pd

from .errors import (
    DegenerateFeatureError,
    DimensionError,
    DuplicateTimestampError,
    InsufficientDataError,
    SchemaError,
)

INTERVAL_STEP = {
    "hourly": np.timedelta64(1, "h"),
    "daily": np.timedelta64(24, "h"),
    "weekly": np.timedelta64(7 * 24, "h"),
}

SENSOR_COLUMNS = (
    "co2",
    "humidity",
    "radiation",
    "temp_in",
    "temp_out",
    "stem_diameter",
    "yield",
)


@dataclass(frozen=True)
class TimeSeriesTable:
    """Uniformly gridded multi-column series at a declared sampling interval.

    Timestamps are strictly increasing and aligned to the interval grid;
    gaps (dropped rows) are permitted, off-grid timestamps are not.
    """

    timestamps: np.ndarray  # datetime64[s]
    columns: dict[str, np.ndarray]
    interval: str

    def __post_init__(self):
        if self.interval not in INTERVAL_STEP:
            raise SchemaError(f"unknown interval {self.interval!r}")
        n = len(self.timestamps)
        for name, values in self.columns.items():
            if len(values) != n:
                raise SchemaError(
                    f"column {name!r} has length {len(values)}, expected {n}"
                )
            if not np.all(np.isfinite(values)):
                raise SchemaError(f"column {name!r} contains non-finite values")
        if n >= 2:
            deltas = np.diff(self.timestamps)
            if np.any(deltas <= np.timedelta64(0, "s")):
                raise DuplicateTimestampError("timestamps not strictly increasing")
            step = INTERVAL_STEP[self.interval]
            if np.any(deltas % step != np.timedelta64(0, "s")):
                raise SchemaError(
                    f"timestamps not aligned to the {self.interval} grid"
                )

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def column_names(self) -> list[str]:
        return list(self.columns)

    def matrix(self, names: Sequence[str] | None = None) -> np.ndarray:
        """Stack the named columns (default: all) into an n x d array."""
        names = list(names) if names is not None else self.column_names
        return np.column_stack([self.columns[c] for c in names])

    def with_column(self, name: str, values: np.ndarray) -> "TimeSeriesTable":
        cols = dict(self.columns)
        cols[name] = np.asarray(values, dtype=float)
        return TimeSeriesTable(self.timestamps, cols, self.interval)

    def select(self, names: Sequence[str]) -> "TimeSeriesTable":
        return TimeSeriesTable(
            self.timestamps, {c: self.columns[c] for c in names}, self.interval
        )

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.columns)
        df.insert(0, "timestamp", pd.DatetimeIndex(self.timestamps, tz="UTC"))
        return df


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature min/max fitted on the training partition only."""

    feature_names: tuple[str, ...]
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        if np.any(self.maximum <= self.minimum):
            bad = [
                name
                for name, lo, hi in zip(self.feature_names, self.minimum, self.maximum)
                if hi <= lo
            ]
            raise DegenerateFeatureError(
                f"constant training feature(s): {', '.join(bad)}"
            )

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "minimum": self.minimum.tolist(),
            "maximum": self.maximum.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationParams":
        return cls(
            tuple(d["feature_names"]),
            np.asarray(d["minimum"], dtype=float),
            np.asarray(d["maximum"], dtype=float),
        )


@dataclass(frozen=True)
class SupervisedWindowSet:
    """Fixed-length input windows paired with one-step-ahead scalar targets."""

    inputs: np.ndarray  # n_samples x window_length x n_features
    targets: np.ndarray  # n_samples
    feature_names: tuple[str, ...]
    target_name: str
    window_length: int
    norm: NormalizationParams | None = None

    def __post_init__(self):
        if self.inputs.ndim != 3:
            raise DimensionError("inputs must be n x window x features")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise DimensionError("inputs/targets length mismatch")
        if self.inputs.shape[1] != self.window_length:
            raise DimensionError("window_length does not match inputs")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def n_features(self) -> int:
        return self.inputs.shape[2]

    def flat_inputs(self) -> np.ndarray:
        """Windows flattened to n x (window*features), for tabular models."""
        n = len(self)
        return self.inputs.reshape(n, -1)

    def subset(self, start: int, stop: int) -> "SupervisedWindowSet":
        return SupervisedWindowSet(
            self.inputs[start:stop],
            self.targets[start:stop],
            self.feature_names,
            self.target_name,
            self.window_length,
            self.norm,
        )


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test fractions."""

    train_fraction: float = 0.60
    validation_fraction: float = 0.15
    test_fraction: float = 0.25

    def __post_init__(self):
        total = self.train_fraction + self.validation_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-12:
            raise SchemaError(f"split fractions sum to {total}, expected 1.0")


def ingest(
    source: bytes | str | IO, schema: Sequence[str], interval: str | None = None
) -> TimeSeriesTable:
    """Parse a sensor CSV into a clean table.

    Rows with an unparseable timestamp or any missing/unparseable numeric
    cell are dropped. Duplicate timestamps are an error. The sampling
    interval is inferred from the smallest gap unless given explicitly.
    """
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    elif isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    try:
        df = pd.read_csv(source)
    except Exception as exc:
        raise SchemaError(f"unreadable CSV: {exc}") from exc
    if "timestamp" not in df.columns:
        raise SchemaError("missing required column 'timestamp'")
    missing = [c for c in schema if c not in df.columns]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")

    stamps = pd.to_datetime(df["timestamp"], utc=True, errors="coerce", format="ISO8601")
    keep = stamps.notna()
    numeric = {}
    for c in schema:
        col = pd.to_numeric(df[c], errors="coerce")
        col[~np.isfinite(col)] = np.nan
        keep &= col.notna()
        numeric[c] = col

    stamps = stamps[keep]
    if stamps.duplicated().any():
        dup = stamps[stamps.duplicated()].iloc[0]
        raise DuplicateTimestampError(f"duplicate timestamp {dup.isoformat()}")
    if keep.sum() < 2:
        raise InsufficientDataError(
            f"only {int(keep.sum())} usable row(s) after cleaning"
        )

    naive = stamps.dt.tz_convert("UTC").dt.tz_localize(None)
    order = np.argsort(naive.to_numpy(), kind="stable")
    ts = naive.to_numpy()[order].astype("datetime64[s]")
    columns = {
        c: numeric[c][keep].to_numpy(dtype=float)[order] for c in schema
    }
    if interval is None:
        interval = _infer_interval(ts)
    return TimeSeriesTable(ts, columns, interval)


def _infer_interval(ts: np.ndarray) -> str:
    deltas = np.diff(ts)
    # largest declared step that divides every gap (gaps from dropped rows
    # are integer multiples of the true interval)
    for name in ("weekly", "daily", "hourly"):
        if np.all(deltas % INTERVAL_STEP[name] == np.timedelta64(0, "s")):
            return name
    raise SchemaError(f"cannot infer interval from steps {np.unique(deltas)}")


def resample_daily_mean(table: TimeSeriesTable) -> TimeSeriesTable:
    """Average hourly rows into one row per fully covered calendar day."""
    if table.interval != "hourly":
        raise SchemaError(f"expected hourly table, got {table.interval}")
    if len(table) == 0:
        raise InsufficientDataError("empty table")
    days = table.timestamps.astype("datetime64[D]")
    uniq, counts = np.unique(days, return_counts=True)
    full = uniq[counts == 24]  # partial days (boundary or gappy) dropped
    if len(full) == 0:
        raise InsufficientDataError("no fully covered calendar day")
    out_cols: dict[str, list] = {c: [] for c in table.column_names}
    for day in full:
        mask = days == day
        for c in table.column_names:
            out_cols[c].append(table.columns[c][mask].mean())
    ts = full.astype("datetime64[s]")
    return TimeSeriesTable(ts, {c: np.array(v) for c, v in out_cols.items()}, "daily")


def interpolate_weekly_to_daily(
    table: TimeSeriesTable, column: str
) -> TimeSeriesTable:
    """Expand one weekly column to daily resolution by linear interpolation.

    Weekly anchors are reproduced exactly; output length is 7*(weeks-1)+1.
    """
    if table.interval != "weekly":
        raise SchemaError(f"expected weekly table, got {table.interval}")
    if len(table) < 2:
        raise InsufficientDataError("need at least 2 weekly points")
    weekly = table.columns[column]
    weeks = len(weekly)
    day_idx = np.arange(7 * (weeks - 1) + 1, dtype=float)
    anchor_idx = np.arange(weeks, dtype=float) * 7.0
    daily = np.interp(day_idx, anchor_idx, weekly)
    daily[::7] = weekly  # anchors exact, immune to float round-off
    ts = table.timestamps[0] + day_idx.astype("timedelta64[D]").astype(
        "timedelta64[s]"
    )
    return TimeSeriesTable(ts, {column: daily}, "daily")


def compute_sdv(stem_diameter: np.ndarray) -> np.ndarray:
    """Hourly stem-diameter variation: first difference, length n-1."""
    stem_diameter = np.asarray(stem_diameter, dtype=float)
    if stem_diameter.ndim != 1:
        raise DimensionError("expected a 1-D series")
    if len(stem_diameter) < 2:
        raise InsufficientDataError("need at least 2 diameter readings")
    return np.diff(stem_diameter)


def normalize_fit(
    values: np.ndarray, feature_names: Sequence[str]
) -> NormalizationParams:
    """Fit per-feature min/max. Call on the training partition only."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return NormalizationParams(
        tuple(feature_names), values.min(axis=0), values.max(axis=0)
    )


def normalize_apply(values: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """Scale features to [0,1] using training min/max (values may exceed it)."""
    lo, hi = params.minimum, params.maximum
    return (np.asarray(values, dtype=float) - lo) / (hi - lo)


def denormalize(values: np.ndarray, params: NormalizationParams) -> np.ndarray:
    lo, hi = params.minimum, params.maximum
    return np.asarray(values, dtype=float) * (hi - lo) + lo


def make_windows(
    table: TimeSeriesTable,
    target_column: str,
    window_length: int,
    norm: NormalizationParams | None = None,
) -> SupervisedWindowSet:
    """Slice the table into one-step-ahead supervised samples.

    Sample i covers rows [i, i+window_length) of every column and targets
    target_column at row i+window_length.
    """
    if window_length < 1:
        raise InsufficientDataError("window_length must be >= 1")
    n = len(table)
    if n <= window_length:
        raise InsufficientDataError(
            f"series length {n} must exceed window_length {window_length}"
        )
    names = table.column_names
    mat = table.matrix(names)
    n_samples = n - window_length
    idx = np.arange(window_length)[None, :] + np.arange(n_samples)[:, None]
    inputs = mat[idx]  # n_samples x window x features
    targets = table.columns[target_column][window_length:].copy()
    return SupervisedWindowSet(
        inputs, targets, tuple(names), target_column, window_length, norm
    )


def split_chronological(
    wset: SupervisedWindowSet, spec: SplitSpec = SplitSpec()
) -> tuple[SupervisedWindowSet, SupervisedWindowSet, SupervisedWindowSet]:
    """Contiguous train -> validation -> test blocks with floor rounding."""
    n = len(wset)
    if n < 4:
        raise InsufficientDataError(f"need at least 4 samples, got {n}")
    n_train = int(np.floor(spec.train_fraction * n))
    n_val = int(np.floor(spec.validation_fraction * n))
    if n_val == 0:
        warnings.warn("validation split is empty at this sample count")
    return (
        wset.subset(0, n_train),
        wset.subset(n_train, n_train + n_val),
        wset.subset(n_train + n_val, n),
    )


def split_counts(n: int, spec: SplitSpec = SplitSpec()) -> tuple[int, int, int]:
    n_train = int(np.floor(spec.train_fraction * n))
    n_val = int(np.floor(spec.validation_fraction * n))
    return n_train, n_val, n - n_train - n_val


@dataclass(frozen=True)
class PreparedDataset:
    """Normalized, windowed and split dataset plus its provenance."""

    train: SupervisedWindowSet
    validation: SupervisedWindowSet
    test: SupervisedWindowSet
    norm: NormalizationParams
    table: TimeSeriesTable
    target_column: str
    window_length: int
    split: SplitSpec = field(default_factory=SplitSpec)

    @property
    def target_index(self) -> int:
        return self.train.feature_names.index(self.target_column)

    def denorm_targets(self, values: np.ndarray) -> np.ndarray:
        i = self.target_index
        lo, hi = self.norm.minimum[i], self.norm.maximum[i]
        return np.asarray(values, dtype=float) * (hi - lo) + lo


def prepare_supervised(
    table: TimeSeriesTable,
    target_column: str,
    window_length: int,
    spec: SplitSpec = SplitSpec(),
) -> PreparedDataset:
    """Normalize, window and split a table without training-set leakage.

    Min/max scaling is fitted only on the rows visible to training samples
    (the first train_count + window_length rows) and then applied to the
    whole table.
    """
    n = len(table)
    if n <= window_length:
        raise InsufficientDataError(
            f"series length {n} must exceed window_length {window_length}"
        )
    n_samples = n - window_length
    n_train, _, _ = split_counts(n_samples, spec)
    names = table.column_names
    train_rows = table.matrix(names)[: n_train + window_length]
    norm = normalize_fit(train_rows, names)
    scaled_cols = {
        c: normalize_apply(table.columns[c], _single(norm, c)) for c in names
    }
    scaled = TimeSeriesTable(table.timestamps, scaled_cols, table.interval)
    wset = make_windows(scaled, target_column, window_length, norm)
    train, val, test = split_chronological(wset, spec)
    return PreparedDataset(
        train, val, test, norm, table, target_column, window_length, spec
    )


def _single(params: NormalizationParams, name: str) -> NormalizationParams:
    i = params.feature_names.index(name)
    return NormalizationParams(
        (name,), params.minimum[i : i + 1], params.maximum[i : i + 1]
    )
