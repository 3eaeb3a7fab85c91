"""Comparison-report assembly: aligned text table and JSON emission.

The text layout puts dataset groups as column groups, models as
sub-columns and metrics as rows, e.g.::

    Datasets  Tomato Yield              Ficus Growth(SDV)
              SVR     RF      LSTM      SVR     RF      LSTM
    MSE       0.015   0.040   0.002     0.006   0.006   0.001
"""

from __future__ import annotations

import json
import re

from .errors import IncompleteReportError

MODEL_ORDER = ("SVR", "RF", "LSTM")
METRIC_ORDER = ("MSE", "RMSE", "MAE")

SCENARIO_TITLES = {
    "tomato_yield": "Tomato Yield",
    "ficus_sdv": "Ficus Growth(SDV)",
}

TableData = dict[str, dict[str, dict[str, float]]]  # group -> model -> metric


def format_report_table(data: TableData, title: str | None = None) -> str:
    """Render group/model/metric values as an aligned plain-text table."""
    groups = list(data)
    for g in groups:
        for m in MODEL_ORDER:
            if m not in data[g]:
                raise IncompleteReportError(f"missing model {m} in group {g!r}")
            for metric in METRIC_ORDER:
                if metric not in data[g][m]:
                    raise IncompleteReportError(
                        f"missing {metric} for {m} in group {g!r}"
                    )
    col = 9
    group_width = col * len(MODEL_ORDER)
    lines = []
    if title:
        lines.append(title)
    head = "Datasets".ljust(10)
    sub = " " * 10
    for g in groups:
        head += g.ljust(group_width)
        for m in MODEL_ORDER:
            sub += m.ljust(col)
    lines.append(head.rstrip())
    lines.append(sub.rstrip())
    for metric in METRIC_ORDER:
        row = metric.ljust(10)
        for g in groups:
            for m in MODEL_ORDER:
                row += f"{data[g][m][metric]:.3f}".ljust(col)
        lines.append(row.rstrip())
    return "\n".join(lines) + "\n"


def parse_report_table(text: str) -> TableData:
    """Invert format_report_table; tolerant of trailing whitespace."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header_idx = next(
        (k for k, ln in enumerate(lines) if ln.startswith("Datasets")), None
    )
    if header_idx is None:
        raise IncompleteReportError("no 'Datasets' header line")
    groups = re.split(r"\s{2,}", lines[header_idx].strip())[1:]
    models = re.split(r"\s{2,}", lines[header_idx + 1].strip())
    per_group = len(models) // len(groups) if groups else 0
    if not groups or per_group * len(groups) != len(models):
        raise IncompleteReportError("model columns do not tile the groups")
    data: TableData = {g: {m: {} for m in models[:per_group]} for g in groups}
    for ln in lines[header_idx + 2 :]:
        parts = re.split(r"\s{2,}", ln.strip())
        metric, values = parts[0], parts[1:]
        if len(values) != len(models):
            raise IncompleteReportError(f"row {metric!r} has {len(values)} values")
        for k, v in enumerate(values):
            g = groups[k // per_group]
            m = models[k % per_group]
            data[g][m][metric] = float(v)
    return data


def write_report_json(report: dict, path) -> None:
    """Deterministic JSON: sorted keys, no timestamps or wall times."""
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
