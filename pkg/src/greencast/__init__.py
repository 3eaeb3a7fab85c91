"""Greenhouse growth and yield forecasting toolkit.

From-scratch LSTM, epsilon-SVR and random-forest regressors on a shared
time-series preparation pipeline, with relative-error evaluation, grid
search and a reproducible synthetic greenhouse benchmark.
"""

from . import errors, lstm, metrics, rf, svr, synth, timeseries, tuning

__all__ = [
    "errors",
    "lstm",
    "metrics",
    "rf",
    "svr",
    "synth",
    "timeseries",
    "tuning",
]

__version__ = "0.1.0"
