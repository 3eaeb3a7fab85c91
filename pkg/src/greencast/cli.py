"""Command-line experiment runner.

Subcommands:
  synth     generate a synthetic greenhouse dataset as CSV
  prepare   build and save a model-ready dataset (CSV + JSON manifest)
  train     train one model family with fixed hyperparameters
  evaluate  score a saved model on a dataset's test block
  compare   full protocol: tune all three families, test once, emit reports
  overlay   re-emit the prediction overlay CSV from a saved report

Configuration is a flat key-value file with dotted keys; command-line
flags override file values.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiment, lstm, rf, svr, synth
from . import timeseries as ts
from .errors import (
    ConfigError,
    DuplicateTimestampError,
    GreencastError,
    InsufficientDataError,
    NoViableConfigError,
    SchemaError,
    StageError,
    TrainingDivergedError,
)
from .tuning import DEFAULT_GRIDS, GridSpec, TrainedModel, grid_search

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4


def _parse_value(raw: str):
    token = raw.strip()
    low = token.lower()
    if low in ("none", "unlimited"):
        return None
    if low in ("true", "false"):
        return low == "true"
    for caster in (int, float):
        try:
            return caster(token)
        except ValueError:
            continue
    return token


def load_config_file(path) -> dict:
    """Flat `key = value` lines, '#' comments, comma-separated lists."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        parsed = [_parse_value(tok) for tok in raw.split(",")]
        values[key] = parsed if len(parsed) > 1 else parsed[0]
    return values


def build_experiment_config(file_values: dict, args) -> experiment.ExperimentConfig:
    get = file_values.get

    scenario = args.scenario or get("scenario", "both")
    if scenario == "both":
        scenarios = ("ficus_sdv", "tomato_yield")
    elif scenario in synth.SCENARIOS:
        scenarios = (scenario,)
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")

    days, window = {}, {}
    for s in synth.SCENARIOS:
        if get(f"data.days.{s}") is not None:
            days[s] = int(get(f"data.days.{s}"))
        if get(f"prepare.window_length.{s}") is not None:
            window[s] = int(get(f"prepare.window_length.{s}"))
    if getattr(args, "days", None):
        days = {s: args.days for s in scenarios}

    grids = {}
    for family in ("lstm", "svr", "rf"):
        axes = {}
        for key, val in file_values.items():
            prefix = f"grid.{family}."
            if key.startswith(prefix):
                axes[key[len(prefix) :]] = val if isinstance(val, list) else [val]
        if axes:
            grids[family] = axes

    noise = get("data.noise_level", 0.05)
    if getattr(args, "noise_level", None) is not None:
        noise = args.noise_level
    seed = args.seed if args.seed is not None else int(get("seed", 0))
    out = args.out or get("out", "out")
    metric = getattr(args, "metric", None) or get("metric", "both")
    try:
        return experiment.ExperimentConfig(
            scenarios=scenarios,
            data_csv=get("data.csv"),
            yield_csv=get("data.yield_csv"),
            seed=seed,
            noise_level=float(noise),
            days=days,
            window_length=window,
            metric_variant=metric,
            grids=grids,
            out_dir=str(out),
        )
    except SchemaError as exc:
        raise ConfigError(str(exc)) from exc


def _write_synth_csvs(cfg: synth.SynthConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    data = synth.generate(cfg)
    df = data.hourly.to_frame()
    df["timestamp"] = df["timestamp"].dt.strftime("%Y-%m-%dT%H:%M:%SZ")
    df.to_csv(out_dir / "data.csv", index=False)
    if data.weekly_yield is not None:
        wf = data.weekly_yield.to_frame()
        wf["timestamp"] = wf["timestamp"].dt.strftime("%Y-%m-%dT%H:%M:%SZ")
        wf.to_csv(out_dir / "yield_weekly.csv", index=False)


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        days=args.days
        or experiment.SCENARIO_DEFAULTS[args.scenario or "ficus_sdv"]["days"],
        seed=args.seed or 0,
        scenario=args.scenario or "ficus_sdv",
        noise_level=args.noise_level if args.noise_level is not None else 0.05,
    )
    _write_synth_csvs(cfg, Path(args.out or "out"))
    print(f"wrote synthetic {cfg.scenario} data to {args.out or 'out'}")
    return 0


def _prepared_for(args, file_values=None):
    cfg = build_experiment_config(file_values or {}, args)
    scenario = cfg.scenarios[0]
    return cfg, scenario, experiment.run_scenario  # run lazily where needed


def cmd_prepare(args) -> int:
    cfg = build_experiment_config(_file_values(args), args)
    scenario = cfg.scenarios[0]
    table = experiment.build_scenario_table(cfg, scenario)
    defaults = experiment.SCENARIO_DEFAULTS[scenario]
    window = cfg.window_length.get(scenario, defaults["window"])
    prepared = ts.prepare_supervised(table, defaults["target"], window, cfg.split)
    experiment.write_dataset(prepared, Path(cfg.out_dir))
    print(f"wrote dataset + manifest to {cfg.out_dir}")
    return 0


def _single_cell_grid(family: str, overrides: dict) -> GridSpec:
    axes = {k: [v] for k, v in overrides.items()}
    if not axes:
        axes = {k: [v[0]] for k, v in DEFAULT_GRIDS[family].items()}
    return GridSpec(family, axes)


def _parse_sets(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        out[key.strip()] = _parse_value(raw)
    return out


def _save_model(model: TrainedModel, path: Path) -> None:
    if model.family == "lstm":
        inner = model.model.to_dict()
    else:
        inner = model.model.to_dict()
    with open(path, "w") as fh:
        json.dump(
            {"family": model.family, "window_length": model.window_length, "model": inner},
            fh,
        )


def _load_model(path) -> TrainedModel:
    with open(path) as fh:
        doc = json.load(fh)
    family = doc["family"]
    loader = {
        "lstm": lstm.LstmParams.from_dict,
        "svr": svr.SvrModel.from_dict,
        "rf": rf.Forest.from_dict,
    }[family]
    return TrainedModel(family, loader(doc["model"]), doc.get("window_length"))


def cmd_train(args) -> int:
    cfg = build_experiment_config(_file_values(args), args)
    scenario = cfg.scenarios[0]
    table = experiment.build_scenario_table(cfg, scenario)
    defaults = experiment.SCENARIO_DEFAULTS[scenario]
    window = cfg.window_length.get(scenario, defaults["window"])
    prepared = ts.prepare_supervised(table, defaults["target"], window, cfg.split)
    grid = _single_cell_grid(args.family, _parse_sets(args.set))
    result = grid_search(
        args.family, grid, prepared.train, prepared.validation, cfg.seed,
        prepared.denorm_targets,
    )
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"model_{args.family}.json"
    _save_model(result.best_model, path)
    print(f"trained {args.family} ({result.best_config}); saved to {path}")
    print(f"validation relative MSE: {result.trials[0].validation_metric:.6g}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = build_experiment_config(_file_values(args), args)
    scenario = cfg.scenarios[0]
    table = experiment.build_scenario_table(cfg, scenario)
    defaults = experiment.SCENARIO_DEFAULTS[scenario]
    window = cfg.window_length.get(scenario, defaults["window"])
    prepared = ts.prepare_supervised(table, defaults["target"], window, cfg.split)
    model = _load_model(args.model)
    preds = prepared.denorm_targets(model.predict(prepared.test))
    actual = prepared.denorm_targets(prepared.test.targets)
    from .metrics import absolute_variants, relative_report

    out = {
        "family": model.family,
        "relative": relative_report(actual, preds).to_dict(),
        "absolute": absolute_variants(actual, preds).to_dict(),
    }
    print(json.dumps(out, indent=1, sort_keys=True))
    return 0


def cmd_compare(args) -> int:
    cfg = build_experiment_config(_file_values(args), args)
    payload = experiment.run_experiment(cfg, render_figures=not args.no_figures)
    print((Path(cfg.out_dir) / "report.txt").read_text())
    for scenario in payload["scenarios"]:
        print(f"artifacts for {scenario}: {Path(cfg.out_dir) / scenario}")
    return 0


def cmd_overlay(args) -> int:
    with open(args.report) as fh:
        payload = json.load(fh)
    if args.scenario not in payload.get("scenarios", {}):
        raise SchemaError(f"report has no scenario {args.scenario!r}")
    experiment.emit_overlay(payload["scenarios"][args.scenario], args.out or "overlay.csv")
    print(f"wrote {args.out or 'overlay.csv'}")
    return 0


def _file_values(args) -> dict:
    if getattr(args, "config", None):
        return load_config_file(args.config)
    return {}


def _add_common(p, scenario_required=False):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output directory")
    p.add_argument(
        "--scenario", choices=["ficus_sdv", "tomato_yield", "both"], default=None
    )
    p.add_argument("--days", type=int, default=None)
    p.add_argument("--noise-level", type=float, default=None, dest="noise_level")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="greencast",
        description="Greenhouse growth/yield forecasting benchmark runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic data CSVs")
    _add_common(p)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("prepare", help="build a model-ready dataset")
    _add_common(p)
    p.set_defaults(fn=cmd_prepare)

    p = sub.add_parser("train", help="train one family with fixed hyperparameters")
    _add_common(p)
    p.add_argument("--family", choices=["lstm", "svr", "rf"], required=True)
    p.add_argument("--set", action="append", help="hyperparameter key=value")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on the test block")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("compare", help="full three-model comparison protocol")
    _add_common(p)
    p.add_argument("--metric", choices=["relative", "absolute", "both"], default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("overlay", help="emit overlay CSV from a saved report")
    p.add_argument("--report", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_overlay)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, DuplicateTimestampError, InsufficientDataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingDivergedError, NoViableConfigError) as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except StageError as exc:
        cause = exc.cause
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, (TrainingDivergedError, NoViableConfigError)):
            return EXIT_TRAINING
        if isinstance(cause, ConfigError):
            return EXIT_CONFIG
        return EXIT_DATA
    except GreencastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
