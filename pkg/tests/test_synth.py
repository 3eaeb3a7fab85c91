import numpy as np
import pytest

from greencast import synth
from greencast.errors import ConfigError
from greencast.timeseries import compute_sdv


def autocorr(x, lag):
    x = x - x.mean()
    return float(np.dot(x[:-lag], x[lag:]) / np.dot(x, x))


class TestConfig:
    def test_rejects_bad_scenario(self):
        with pytest.raises(ConfigError):
            synth.SynthConfig(days=30, seed=0, scenario="corn")

    def test_rejects_negative_noise(self):
        with pytest.raises(ConfigError):
            synth.SynthConfig(days=30, seed=0, scenario="ficus_sdv", noise_level=-0.1)

    def test_tomato_needs_two_weeks(self):
        with pytest.raises(ConfigError):
            synth.SynthConfig(days=10, seed=0, scenario="tomato_yield")


class TestDeterminism:
    @pytest.mark.parametrize("scenario", synth.SCENARIOS)
    def test_same_config_bit_identical(self, scenario):
        cfg = synth.SynthConfig(days=21, seed=42, scenario=scenario, noise_level=0.1)
        d1, d2 = synth.generate(cfg), synth.generate(cfg)
        for c in d1.hourly.column_names:
            np.testing.assert_array_equal(d1.hourly.columns[c], d2.hourly.columns[c])
        if d1.weekly_yield is not None:
            np.testing.assert_array_equal(
                d1.weekly_yield.columns["yield"], d2.weekly_yield.columns["yield"]
            )

    def test_different_seeds_differ(self):
        c1 = synth.SynthConfig(days=21, seed=1, scenario="ficus_sdv", noise_level=0.1)
        c2 = synth.SynthConfig(days=21, seed=2, scenario="ficus_sdv", noise_level=0.1)
        a = synth.generate(c1).hourly.columns["stem_diameter"]
        b = synth.generate(c2).hourly.columns["stem_diameter"]
        assert not np.array_equal(a, b)


class TestPlausibilityBounds:
    @pytest.mark.parametrize("noise", [0.0, 0.05, 0.2])
    def test_physical_ranges(self, noise):
        cfg = synth.SynthConfig(days=28, seed=5, scenario="tomato_yield", noise_level=noise)
        data = synth.generate(cfg)
        h = data.hourly.columns
        assert np.all(h["radiation"] >= 0)
        assert np.all((h["co2"] >= 200) & (h["co2"] <= 1500))
        assert np.all((h["humidity"] >= 0) & (h["humidity"] <= 100))
        y = data.weekly_yield.columns["yield"]
        assert np.all(y >= 0)
        assert np.all(np.diff(y) >= 0)  # cumulative yield non-decreasing


class TestPlantedDependencies:
    def test_sdv_diurnal_periodicity(self):
        cfg = synth.SynthConfig(days=30, seed=0, scenario="ficus_sdv", noise_level=0.0)
        stem = synth.generate(cfg).hourly.columns["stem_diameter"]
        sdv = compute_sdv(stem)
        # the daily cycle rides on a slow growth trend; remove the trend
        # before measuring periodicity
        t = np.arange(len(sdv))
        detrended = sdv - np.polyval(np.polyfit(t, sdv, 1), t)
        assert autocorr(detrended, 24) > 0.95

    def test_sdv_strictly_positive(self):
        cfg = synth.SynthConfig(days=30, seed=0, scenario="ficus_sdv", noise_level=0.0)
        stem = synth.generate(cfg).hourly.columns["stem_diameter"]
        assert compute_sdv(stem).min() > 0.0

    def test_yield_tracks_lagged_driver(self):
        cfg = synth.SynthConfig(days=140, seed=0, scenario="tomato_yield", noise_level=0.0)
        data = synth.generate(cfg)
        increments = synth.yield_increments(data.weekly_yield.columns["yield"])
        driver = synth.weekly_assimilation(
            cfg,
            # reconstruct the clean drivers deterministically
            *_clean_drivers(cfg),
        )
        corr = np.corrcoef(increments, driver)[0, 1]
        assert corr > 0.9
        shuffled = driver[np.random.default_rng(123).permutation(len(driver))]
        assert np.corrcoef(increments, shuffled)[0, 1] < corr

    def test_linear_oracle_on_true_feature(self):
        cfg = synth.SynthConfig(days=140, seed=0, scenario="tomato_yield", noise_level=0.0)
        data = synth.generate(cfg)
        increments = synth.yield_increments(data.weekly_yield.columns["yield"])
        driver = synth.weekly_assimilation(cfg, *_clean_drivers(cfg))
        A = np.column_stack([driver, np.ones_like(driver)])
        coef, *_ = np.linalg.lstsq(A, increments, rcond=None)
        pred = A @ coef
        keep = np.abs(increments) > 1e-12
        rel_mse = np.mean(((increments[keep] - pred[keep]) / increments[keep]) ** 2)
        assert rel_mse < 0.05


def _clean_drivers(cfg):
    clean = synth.SynthConfig(
        days=cfg.days,
        seed=cfg.seed,
        scenario=cfg.scenario,
        noise_level=0.0,
        dependency_lag=cfg.dependency_lag,
    )
    hourly = synth.generate(clean).hourly
    return hourly.columns["radiation"], hourly.columns["temp_in"]
