"""Deterministic exhaustive grid search over model hyperparameters.

One model is trained per cell of the Cartesian product, axes enumerated in
lexicographic name order, and the cell with the lowest validation relative
MSE wins. Failed or diverged trials score infinity and never abort the
sweep.
"""

from __future__ import annotations

import csv
import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import lstm as lstm_mod
from . import rf as rf_mod
from . import svr as svr_mod
from .errors import GreencastError, NoViableConfigError
from .metrics import relative_mse
from .timeseries import SupervisedWindowSet

FAMILIES = ("lstm", "svr", "rf")

VALID_AXES = {
    "lstm": {"hidden_dim", "learning_rate", "epochs", "window_length"},
    "svr": {"C", "gamma", "epsilon"},
    "rf": {"n_trees", "max_depth"},
}

DEFAULT_GRIDS = {
    "lstm": {"hidden_dim": [8, 16, 32]},
    "svr": {"C": [0.1, 1.0, 10.0, 100.0], "gamma": [0.01, 0.1, 1.0]},
    "rf": {"n_trees": [10, 50, 100], "max_depth": [4, 8, None]},
}

LSTM_DEFAULTS = {"hidden_dim": 16, "learning_rate": 0.3, "epochs": 400}


@dataclass(frozen=True)
class GridSpec:
    model_family: str
    axes: dict[str, list]

    def __post_init__(self):
        if self.model_family not in FAMILIES:
            raise ValueError(f"unknown model family {self.model_family!r}")
        bad = set(self.axes) - VALID_AXES[self.model_family]
        if bad:
            raise ValueError(
                f"invalid axes for {self.model_family}: {', '.join(sorted(bad))}"
            )
        for name, values in self.axes.items():
            if not values:
                raise ValueError(f"axis {name!r} is empty")

    def cells(self):
        """Full Cartesian product in lexicographic axis order."""
        names = sorted(self.axes)
        for combo in itertools.product(*(self.axes[n] for n in names)):
            yield dict(zip(names, combo))


@dataclass(frozen=True)
class TrainedModel:
    """A fitted model of any family, with a uniform prediction surface."""

    family: str
    model: object
    window_length: int | None = None  # lstm only: trailing steps consumed

    def predict(self, wset: SupervisedWindowSet) -> np.ndarray:
        if self.family == "lstm":
            X = wset.inputs
            if self.window_length and self.window_length < X.shape[1]:
                X = X[:, -self.window_length :, :]
            return lstm_mod.predict_batch(self.model, X)
        if self.family == "svr":
            return np.atleast_1d(svr_mod.predict(self.model, wset.flat_inputs()))
        return rf_mod.predict_forest_batch(self.model, wset.flat_inputs())


@dataclass
class TrialResult:
    config: dict
    validation_metric: float
    train_metric: float
    rank: int = 0
    wall_time: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class GridSearchResult:
    best_config: dict
    best_model: TrainedModel
    trials: list[TrialResult]


def _trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _fit_one(
    family: str,
    cfg: dict,
    train: SupervisedWindowSet,
    validation: SupervisedWindowSet,
    seed: int,
) -> TrainedModel:
    if family == "lstm":
        merged = {**LSTM_DEFAULTS, **cfg}
        w = merged.get("window_length", train.window_length)
        X = train.inputs[:, -w:, :] if w < train.window_length else train.inputs
        Xv = (
            validation.inputs[:, -w:, :]
            if w < validation.window_length
            else validation.inputs
        )
        params = lstm_mod.init_params(train.n_features, merged["hidden_dim"], seed)
        tc = lstm_mod.TrainConfig(
            learning_rate=merged["learning_rate"],
            epochs=merged["epochs"],
            seed=seed,
        )
        # the trainer keeps the epoch snapshot with the lowest validation MSE
        fitted, _ = lstm_mod.train(params, X, train.targets, Xv, validation.targets, tc)
        return TrainedModel("lstm", fitted, w)
    if family == "svr":
        sc = svr_mod.SvrConfig(
            C=cfg.get("C", 1.0),
            gamma=cfg.get("gamma", 0.1),
            epsilon=cfg.get("epsilon", 0.1),
        )
        model = svr_mod.fit_smo(train.flat_inputs(), train.targets, sc)
        return TrainedModel("svr", model)
    fc = rf_mod.ForestConfig(
        n_trees=cfg.get("n_trees", 100),
        max_depth=cfg.get("max_depth"),
        seed=seed,
    )
    return TrainedModel("rf", rf_mod.fit_forest(train.flat_inputs(), train.targets, fc))


def grid_search(
    family: str,
    grid: GridSpec,
    train: SupervisedWindowSet,
    validation: SupervisedWindowSet,
    seed: int,
    denorm=None,
) -> GridSearchResult:
    """Exhaustive sweep; argmin of validation relative MSE, first-cell ties.

    `denorm` optionally maps targets/predictions back to original units
    before scoring, keeping the selection metric in the same space as the
    final evaluation.
    """
    if denorm is None:
        denorm = lambda values: values
    if len(train) == 0 or len(validation) == 0:
        raise GreencastError("train and validation sets must be non-empty")
    if grid.model_family != family:
        raise ValueError("grid family does not match requested family")
    trials: list[TrialResult] = []
    models: list[TrainedModel | None] = []
    for index, cfg in enumerate(grid.cells()):
        t0 = time.perf_counter()
        try:
            model = _fit_one(family, cfg, train, validation, _trial_seed(seed, index))
            val_metric = relative_mse(
                denorm(validation.targets), denorm(model.predict(validation))
            )
            train_metric = relative_mse(
                denorm(train.targets), denorm(model.predict(train))
            )
            if not np.isfinite(val_metric):
                val_metric, model = np.inf, None
            if not np.isfinite(train_metric):
                train_metric = np.inf
            trials.append(
                TrialResult(cfg, val_metric, train_metric, 0, time.perf_counter() - t0)
            )
            models.append(model)
        except GreencastError as exc:
            trials.append(
                TrialResult(cfg, np.inf, np.inf, 0, time.perf_counter() - t0, str(exc))
            )
            models.append(None)

    order = sorted(range(len(trials)), key=lambda k: trials[k].validation_metric)
    for rank, k in enumerate(order, start=1):
        trials[k].rank = rank
    best_idx = order[0]
    if models[best_idx] is None:
        raise NoViableConfigError("every grid trial failed")
    return GridSearchResult(trials[best_idx].config, models[best_idx], trials)


def leaderboard_to_csv(trials: list[TrialResult], path) -> None:
    """One row per trial: config columns, metrics, rank, wall_time."""
    keys = sorted({k for t in trials for k in t.config})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys + ["validation_metric", "train_metric", "rank", "wall_time", "error"])
        for t in trials:
            writer.writerow(
                [t.config.get(k, "") for k in keys]
                + [t.validation_metric, t.train_metric, t.rank, f"{t.wall_time:.3f}", t.error or ""]
            )
