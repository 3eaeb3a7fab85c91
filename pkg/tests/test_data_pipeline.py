import numpy as np
import pytest
from hypothesis import given, strategies as st

from greencast import timeseries as ts
from greencast.errors import (
    DegenerateFeatureError,
    DuplicateTimestampError,
    InsufficientDataError,
    SchemaError,
)


def hourly_csv(rows):
    lines = ["timestamp,co2,humidity"]
    lines += [f"{t},{a},{b}" for t, a, b in rows]
    return "\n".join(lines) + "\n"


class TestIngest:
    def test_three_wellformed_rows(self):
        csv = hourly_csv(
            [
                ("2021-01-01T00:00:00Z", 400, 70),
                ("2021-01-01T01:00:00Z", 410, 71),
                ("2021-01-01T02:00:00Z", 420, 72),
            ]
        )
        table = ts.ingest(csv.encode(), ["co2", "humidity"])
        assert len(table) == 3
        assert all(len(table.columns[c]) == 3 for c in ("co2", "humidity"))
        assert table.interval == "hourly"

    def test_row_with_missing_cell_dropped(self):
        csv = hourly_csv(
            [
                ("2021-01-01T00:00:00Z", 400, 70),
                ("2021-01-01T01:00:00Z", "", 71),
                ("2021-01-01T02:00:00Z", 420, 72),
            ]
        )
        table = ts.ingest(csv.encode(), ["co2", "humidity"])
        assert len(table) == 2
        np.testing.assert_array_equal(table.columns["co2"], [400.0, 420.0])

    def test_duplicate_timestamp_rejected(self):
        csv = hourly_csv(
            [
                ("2021-01-01T00:00:00Z", 400, 70),
                ("2021-01-01T00:00:00Z", 410, 71),
                ("2021-01-01T01:00:00Z", 410, 71),
            ]
        )
        with pytest.raises(DuplicateTimestampError):
            ts.ingest(csv.encode(), ["co2", "humidity"])

    def test_missing_schema_column(self):
        with pytest.raises(SchemaError):
            ts.ingest(hourly_csv([]).encode(), ["co2", "radiation"])

    def test_too_few_surviving_rows(self):
        csv = hourly_csv([("2021-01-01T00:00:00Z", 400, 70)])
        with pytest.raises(InsufficientDataError):
            ts.ingest(csv.encode(), ["co2", "humidity"])

    def test_rows_sorted_by_timestamp(self):
        csv = hourly_csv(
            [
                ("2021-01-01T02:00:00Z", 3, 0),
                ("2021-01-01T00:00:00Z", 1, 0),
                ("2021-01-01T01:00:00Z", 2, 0),
            ]
        )
        table = ts.ingest(csv.encode(), ["co2"])
        np.testing.assert_array_equal(table.columns["co2"], [1.0, 2.0, 3.0])


def make_hourly(values_by_col, start="2021-01-01T00:00:00"):
    n = len(next(iter(values_by_col.values())))
    stamps = np.datetime64(start, "s") + np.arange(n) * np.timedelta64(3600, "s")
    return ts.TimeSeriesTable(
        stamps, {k: np.asarray(v, float) for k, v in values_by_col.items()}, "hourly"
    )


class TestResampleDailyMean:
    def test_arithmetic_sequence_day(self):
        table = make_hourly({"x": np.arange(24.0)})
        daily = ts.resample_daily_mean(table)
        assert len(daily) == 1
        assert daily.columns["x"][0] == pytest.approx(11.5)

    def test_constant_two_days(self):
        table = make_hourly({"co2": [400.0] * 48})
        daily = ts.resample_daily_mean(table)
        np.testing.assert_array_equal(daily.columns["co2"], [400.0, 400.0])

    def test_partial_day_dropped(self):
        table = make_hourly({"x": np.arange(36.0)})
        daily = ts.resample_daily_mean(table)
        assert len(daily) == 1

    def test_no_full_day_error(self):
        with pytest.raises(InsufficientDataError):
            ts.resample_daily_mean(make_hourly({"x": [1.0, 2.0]}))


def make_weekly(values, col="yield"):
    n = len(values)
    stamps = np.datetime64("2021-01-04T00:00:00", "s") + np.arange(n) * np.timedelta64(
        7 * 24 * 3600, "s"
    )
    return ts.TimeSeriesTable(stamps, {col: np.asarray(values, float)}, "weekly")


class TestInterpolateWeeklyToDaily:
    def test_linear_case(self):
        daily = ts.interpolate_weekly_to_daily(make_weekly([0.0, 7.0]), "yield")
        np.testing.assert_allclose(daily.columns["yield"], np.arange(8.0))

    def test_constant_case(self):
        daily = ts.interpolate_weekly_to_daily(make_weekly([5.0, 5.0, 5.0]), "yield")
        assert len(daily) == 15
        np.testing.assert_array_equal(daily.columns["yield"], np.full(15, 5.0))

    def test_symmetry_case(self):
        daily = ts.interpolate_weekly_to_daily(make_weekly([0.0, 7.0, 0.0]), "yield")
        v = daily.columns["yield"]
        np.testing.assert_allclose(v[:8], np.arange(8.0))
        np.testing.assert_allclose(v[7:], np.arange(7.0, -1.0, -1.0))

    def test_single_point_error(self):
        with pytest.raises(InsufficientDataError):
            ts.interpolate_weekly_to_daily(make_weekly([3.0]), "yield")

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=10))
    def test_anchors_reproduced_exactly(self, weekly_vals):
        daily = ts.interpolate_weekly_to_daily(make_weekly(weekly_vals), "yield")
        np.testing.assert_array_equal(daily.columns["yield"][::7], weekly_vals)
        assert len(daily) == 7 * (len(weekly_vals) - 1) + 1


class TestComputeSdv:
    def test_first_differences(self):
        np.testing.assert_allclose(
            ts.compute_sdv(np.array([10.0, 10.2, 10.1])), [0.2, -0.1]
        )

    def test_constant(self):
        np.testing.assert_array_equal(ts.compute_sdv(np.full(5, 9.5)), np.zeros(4))

    def test_shape_contract(self):
        assert len(ts.compute_sdv(np.random.default_rng(0).normal(size=17))) == 16

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            ts.compute_sdv(np.array([1.0]))

    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=50),
    )
    def test_cumsum_round_trip(self, diam):
        diam = np.asarray(diam)
        sdv = ts.compute_sdv(diam)
        rebuilt = np.concatenate([[diam[0]], diam[0] + np.cumsum(sdv)])
        np.testing.assert_allclose(rebuilt, diam, atol=1e-12)


class TestNormalization:
    def test_affine_map(self):
        params = ts.normalize_fit(np.array([[2.0], [4.0], [6.0]]), ["x"])
        out = ts.normalize_apply(np.array([[2.0], [4.0], [6.0]]), params)
        np.testing.assert_allclose(out.ravel(), [0.0, 0.5, 1.0])

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        vals = rng.normal(size=(40, 3)) * 100
        params = ts.normalize_fit(vals, ["a", "b", "c"])
        back = ts.denormalize(ts.normalize_apply(vals, params), params)
        assert np.max(np.abs(back - vals)) < 1e-12

    def test_constant_feature_error(self):
        with pytest.raises(DegenerateFeatureError):
            ts.normalize_fit(np.array([[3.0], [3.0], [3.0]]), ["x"])


class TestMakeWindows:
    def test_sample_count(self):
        table = make_hourly({"a": np.arange(5.0)})
        wset = ts.make_windows(table, "a", 2)
        assert len(wset) == 3
        assert wset.inputs.shape == (3, 2, 1)

    def test_lag_one_pairs(self):
        table = make_hourly({"a": [1.0, 2.0, 3.0]})
        wset = ts.make_windows(table, "a", 1)
        np.testing.assert_array_equal(wset.inputs.ravel(), [1.0, 2.0])
        np.testing.assert_array_equal(wset.targets, [2.0, 3.0])

    def test_window_equals_length_error(self):
        table = make_hourly({"a": np.arange(4.0)})
        with pytest.raises(InsufficientDataError):
            ts.make_windows(table, "a", 4)

    def test_target_is_next_step(self):
        rng = np.random.default_rng(1)
        vals = rng.normal(size=30)
        table = make_hourly({"a": vals, "b": rng.normal(size=30)})
        wset = ts.make_windows(table, "a", 7)
        for i in (0, 5, len(wset) - 1):
            np.testing.assert_array_equal(wset.inputs[i, :, 0], vals[i : i + 7])
            assert wset.targets[i] == vals[i + 7]


class TestSplit:
    def test_paper_fractions_n100(self):
        assert ts.split_counts(100) == (60, 15, 25)

    def test_floor_rule_n10(self):
        assert ts.split_counts(10) == (6, 1, 3)

    def test_n4_with_empty_validation_warns(self):
        table = make_hourly({"a": np.arange(6.0)})
        wset = ts.make_windows(table, "a", 2)  # 4 samples
        with pytest.warns(UserWarning):
            train, val, test = ts.split_chronological(wset)
        assert (len(train), len(val), len(test)) == (2, 0, 2)

    def test_too_few_samples(self):
        table = make_hourly({"a": np.arange(4.0)})
        wset = ts.make_windows(table, "a", 1)  # 3 samples
        with pytest.raises(InsufficientDataError):
            ts.split_chronological(wset)

    @given(st.integers(4, 500))
    def test_disjoint_and_covering(self, n):
        tr, va, te = ts.split_counts(n)
        assert tr + va + te == n
        assert tr >= 0 and va >= 0 and te >= 0

    def test_blocks_chronological(self):
        table = make_hourly({"a": np.arange(40.0)})
        wset = ts.make_windows(table, "a", 3)
        train, val, test = ts.split_chronological(wset)
        combined = np.concatenate([train.targets, val.targets, test.targets])
        np.testing.assert_array_equal(combined, wset.targets)


class TestPrepareSupervised:
    def test_leakage_guard(self):
        # a late spike must not influence the training-min/max
        vals = np.concatenate([np.linspace(0, 1, 90), [50.0] * 10])
        table = make_hourly({"a": vals})
        prepared = ts.prepare_supervised(table, "a", 5)
        i = prepared.train.feature_names.index("a")
        assert prepared.norm.maximum[i] < 2.0

    def test_determinism(self):
        rng = np.random.default_rng(7)
        vals = rng.normal(size=60)
        t1 = ts.prepare_supervised(make_hourly({"a": vals}), "a", 4)
        t2 = ts.prepare_supervised(make_hourly({"a": vals}), "a", 4)
        np.testing.assert_array_equal(t1.train.inputs, t2.train.inputs)
        np.testing.assert_array_equal(t1.test.targets, t2.test.targets)

    def test_denorm_targets_round_trip(self):
        rng = np.random.default_rng(9)
        vals = rng.uniform(5, 15, 80)
        prepared = ts.prepare_supervised(make_hourly({"a": vals}), "a", 4)
        back = prepared.denorm_targets(prepared.test.targets)
        np.testing.assert_allclose(back, vals[-len(back) :], atol=1e-10)
