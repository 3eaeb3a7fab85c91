"""Matplotlib rendering of report figures.

Figures are written to files next to the delimited outputs; nothing is
shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

MODEL_STYLES = {
    "lstm": {"color": "tab:red", "label": "LSTM"},
    "svr": {"color": "tab:blue", "label": "SVR"},
    "rf": {"color": "tab:green", "label": "RF"},
}


def render_overlay_figure(scenario_payload: dict, scenario: str, path) -> None:
    """Test-block actual vs predicted series, one line per model."""
    actual = scenario_payload["actual"]
    steps = range(len(actual))
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(steps, actual, color="black", lw=1.8, label="actual")
    for family, style in MODEL_STYLES.items():
        ax.plot(
            steps,
            scenario_payload["predictions"][family],
            lw=1.1,
            alpha=0.9,
            **style,
        )
    ax.set_xlabel("test step")
    ax.set_ylabel(scenario_payload.get("target", "target"))
    ax.set_title(f"One-step-ahead predictions: {scenario}")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_leaderboard_figure(trials: list, family: str, path) -> None:
    """Validation metric per grid cell, in enumeration order."""
    metrics = [t.validation_metric for t in trials]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(range(len(metrics)), metrics, color="tab:gray")
    ax.set_xlabel("grid cell")
    ax.set_ylabel("validation relative MSE")
    ax.set_title(f"Grid search: {family}")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
