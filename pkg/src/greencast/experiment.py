"""End-to-end experiment runner.

Ties the pipeline together: obtain data (synthetic scenario or CSV),
clean/resample/interpolate, window and split without leakage, grid-search
each model family on the validation split, evaluate the selected models
once on the held-out test block and emit comparison reports, leaderboards
and prediction overlays. The test partition is never read before the
final evaluation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report as report_mod
from . import synth as synth_mod
from . import timeseries as ts
from .errors import GreencastError, IncompleteReportError, SchemaError, StageError
from .metrics import absolute_variants, relative_report
from .tuning import DEFAULT_GRIDS, GridSpec, TrainedModel, grid_search, leaderboard_to_csv

SCENARIO_DEFAULTS = {
    # target column, window length, synthetic span in days
    "ficus_sdv": {"target": "sdv", "window": 24, "days": 30},
    "tomato_yield": {"target": "yield", "window": 7, "days": 140},
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenarios: tuple[str, ...] = ("ficus_sdv", "tomato_yield")
    data_csv: str | None = None  # exactly one source: CSV paths or synth
    yield_csv: str | None = None
    seed: int = 0
    noise_level: float = 0.05
    days: dict = field(default_factory=dict)  # per-scenario override
    window_length: dict = field(default_factory=dict)
    metric_variant: str = "both"  # relative | absolute | both
    grids: dict = field(default_factory=dict)  # family -> axes dict
    split: ts.SplitSpec = field(default_factory=ts.SplitSpec)
    out_dir: str = "out"

    def __post_init__(self):
        if self.metric_variant not in ("relative", "absolute", "both"):
            raise SchemaError(f"unknown metric variant {self.metric_variant!r}")
        if self.data_csv is not None and len(self.scenarios) != 1:
            raise SchemaError("a CSV source requires exactly one scenario")


@dataclass
class ScenarioResult:
    scenario: str
    prepared: ts.PreparedDataset
    best_configs: dict[str, dict]
    models: dict[str, TrainedModel]
    trials: dict[str, list]
    metrics: dict[str, dict[str, dict]]  # model -> variant -> report dict
    predictions: dict[str, np.ndarray]  # model -> denormalized test preds
    actual: np.ndarray  # denormalized test targets
    timestamps: list[str]


def _stage(name):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except GreencastError as exc:
            raise StageError(name, exc) from exc

    return wrap


def build_scenario_table(config: ExperimentConfig, scenario: str) -> ts.TimeSeriesTable:
    """Produce the model-ready table (features + target column) for a scenario."""
    defaults = SCENARIO_DEFAULTS[scenario]
    if config.data_csv is not None:
        schema = list(synth_mod.ENV_COLUMNS) + (
            ["stem_diameter"] if scenario == "ficus_sdv" else []
        )
        with open(config.data_csv, "rb") as fh:
            hourly = _stage("ingest")(ts.ingest, fh.read(), schema)
        weekly = None
        if scenario == "tomato_yield":
            if config.yield_csv is None:
                raise StageError("ingest", SchemaError("tomato_yield needs --yield-csv"))
            with open(config.yield_csv, "rb") as fh:
                weekly = _stage("ingest")(ts.ingest, fh.read(), ["yield"], "weekly")
    else:
        days = config.days.get(scenario, defaults["days"])
        synth_cfg = synth_mod.SynthConfig(
            days=days,
            seed=config.seed,
            scenario=scenario,
            noise_level=config.noise_level,
        )
        data = _stage("synth")(synth_mod.generate, synth_cfg)
        hourly, weekly = data.hourly, data.weekly_yield

    if scenario == "ficus_sdv":
        sdv = _stage("clean")(ts.compute_sdv, hourly.columns["stem_diameter"])
        table = ts.TimeSeriesTable(
            hourly.timestamps[1:],
            {
                **{c: hourly.columns[c][1:] for c in synth_mod.ENV_COLUMNS},
                "sdv": sdv,
            },
            "hourly",
        )
        return table

    daily_env = _stage("resample")(ts.resample_daily_mean, hourly.select(synth_mod.ENV_COLUMNS))
    daily_yield = _stage("interpolate")(ts.interpolate_weekly_to_daily, weekly, "yield")
    # align on the common daily range
    common = np.intersect1d(daily_env.timestamps, daily_yield.timestamps)
    if len(common) < 4:
        raise StageError("resample", SchemaError("too little overlap between env and yield"))
    env_idx = np.searchsorted(daily_env.timestamps, common)
    yld_idx = np.searchsorted(daily_yield.timestamps, common)
    cols = {c: daily_env.columns[c][env_idx] for c in synth_mod.ENV_COLUMNS}
    cols["yield"] = daily_yield.columns["yield"][yld_idx]
    return ts.TimeSeriesTable(common, cols, "daily")


def run_scenario(config: ExperimentConfig, scenario: str) -> ScenarioResult:
    defaults = SCENARIO_DEFAULTS[scenario]
    table = build_scenario_table(config, scenario)
    window = config.window_length.get(scenario, defaults["window"])
    prepared = _stage("prepare")(
        ts.prepare_supervised, table, defaults["target"], window, config.split
    )

    best_configs, models, trials, metrics, predictions = {}, {}, {}, {}, {}
    for family in ("lstm", "svr", "rf"):
        axes = config.grids.get(family, DEFAULT_GRIDS[family])
        result = _stage(f"tune_{family}")(
            grid_search,
            family,
            GridSpec(family, axes),
            prepared.train,
            prepared.validation,
            config.seed,
            prepared.denorm_targets,
        )
        best_configs[family] = result.best_config
        models[family] = result.best_model
        trials[family] = result.trials

    # final, one-time test evaluation; metrics are taken in original units
    # so the relative denominators are the actual measured values
    actual = prepared.denorm_targets(prepared.test.targets)
    for family, model in models.items():
        preds_norm = _stage(f"evaluate_{family}")(model.predict, prepared.test)
        preds = prepared.denorm_targets(preds_norm)
        metrics[family] = {
            "relative": relative_report(actual, preds).to_dict(),
            "absolute": absolute_variants(actual, preds).to_dict(),
        }
        predictions[family] = preds

    n_test = len(prepared.test)
    offset = window + len(prepared.train) + len(prepared.validation)
    stamps = prepared.table.timestamps[offset : offset + n_test]
    timestamps = [str(np.datetime64(s, "s")) + "Z" for s in stamps]
    return ScenarioResult(
        scenario,
        prepared,
        best_configs,
        models,
        trials,
        metrics,
        predictions,
        actual,
        timestamps,
    )


def report_payload(config: ExperimentConfig, results: list[ScenarioResult]) -> dict:
    """JSON-serializable experiment report; deterministic for a fixed config."""
    scenarios = {}
    for r in results:
        scenarios[r.scenario] = {
            "target": r.prepared.target_column,
            "window_length": r.prepared.window_length,
            "n_train": len(r.prepared.train),
            "n_validation": len(r.prepared.validation),
            "n_test": len(r.prepared.test),
            "models": {
                family: {
                    "best_config": {
                        k: v for k, v in r.best_configs[family].items()
                    },
                    **{
                        variant: r.metrics[family][variant]
                        for variant in _variants(config.metric_variant)
                    },
                }
                for family in r.models
            },
            "timestamps": r.timestamps,
            "actual": r.actual.tolist(),
            "predictions": {f: p.tolist() for f, p in r.predictions.items()},
        }
    return {
        "seed": config.seed,
        "noise_level": config.noise_level,
        "metric_variant": config.metric_variant,
        "scenarios": scenarios,
    }


def _variants(variant: str) -> tuple[str, ...]:
    return ("relative", "absolute") if variant == "both" else (variant,)


def report_tables(config: ExperimentConfig, results: list[ScenarioResult]) -> str:
    """Plain-text comparison table(s), one per requested metric variant."""
    chunks = []
    for variant in _variants(config.metric_variant):
        data = {}
        for r in results:
            title = report_mod.SCENARIO_TITLES.get(r.scenario, r.scenario)
            data[title] = {
                family.upper(): {
                    metric: r.metrics[family][variant][metric.lower()]
                    for metric in report_mod.METRIC_ORDER
                }
                for family in r.models
            }
        chunks.append(
            report_mod.format_report_table(data, title=f"[{variant} metrics]")
        )
    return "\n".join(chunks)


def emit_overlay(scenario_payload: dict, path) -> None:
    """Write timestamp/actual/per-model prediction rows in original units."""
    preds = scenario_payload.get("predictions", {})
    for family in ("lstm", "svr", "rf"):
        if family not in preds:
            raise IncompleteReportError(f"missing predictions for {family}")
    n = len(scenario_payload["actual"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "actual", "pred_lstm", "pred_svr", "pred_rf"])
        for k in range(n):
            writer.writerow(
                [
                    scenario_payload["timestamps"][k],
                    repr(scenario_payload["actual"][k]),
                    repr(preds["lstm"][k]),
                    repr(preds["svr"][k]),
                    repr(preds["rf"][k]),
                ]
            )


def write_dataset(prepared: ts.PreparedDataset, out_dir: Path) -> None:
    """Self-describing dataset: column CSV plus JSON sidecar manifest."""
    out_dir.mkdir(parents=True, exist_ok=True)
    df = prepared.table.to_frame()
    df["timestamp"] = df["timestamp"].dt.strftime("%Y-%m-%dT%H:%M:%SZ")
    df.to_csv(out_dir / "dataset.csv", index=False)
    n = len(prepared.train) + len(prepared.validation) + len(prepared.test)
    manifest = {
        "interval": prepared.table.interval,
        "feature_names": list(prepared.train.feature_names),
        "target_column": prepared.target_column,
        "window_length": prepared.window_length,
        "normalization": prepared.norm.to_dict(),
        "split_indices": {
            "train": [0, len(prepared.train)],
            "validation": [
                len(prepared.train),
                len(prepared.train) + len(prepared.validation),
            ],
            "test": [len(prepared.train) + len(prepared.validation), n],
        },
    }
    with open(out_dir / "dataset_manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def run_experiment(config: ExperimentConfig, render_figures: bool = True) -> dict:
    """Run every configured scenario and write all report artifacts."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = [run_scenario(config, s) for s in config.scenarios]
    payload = report_payload(config, results)

    report_mod.write_report_json(payload, out / "report.json")
    with open(out / "report.txt", "w") as fh:
        fh.write(report_tables(config, results))
    for r in results:
        sdir = out / r.scenario
        sdir.mkdir(exist_ok=True)
        write_dataset(r.prepared, sdir)
        for family, fam_trials in r.trials.items():
            leaderboard_to_csv(fam_trials, sdir / f"leaderboard_{family}.csv")
        emit_overlay(payload["scenarios"][r.scenario], sdir / "overlay.csv")
        if render_figures:
            from .plots import render_overlay_figure

            render_overlay_figure(
                payload["scenarios"][r.scenario], r.scenario, sdir / "overlay.png"
            )
    return payload
