import math

import numpy as np
import pytest

from qgames_figures.series import (
    SchemaError, dominance_thresholds_ebits, floored_classical_optimum, group_band,
    moving_average, read_run_csv, split_by_final_mean,
)


class TestMovingAverage:
    def test_window_one_is_identity(self):
        x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
        assert np.array_equal(moving_average(x, 1), x)

    def test_constant_series_is_constant(self):
        x = np.full(40, 0.7025)
        assert np.allclose(moving_average(x, 10), 0.7025)

    def test_trailing_semantics(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        got = moving_average(x, 2)
        assert np.allclose(got, [1.0, 1.5, 2.5, 3.5])

    def test_warmup_uses_available_prefix(self):
        x = np.arange(1.0, 7.0)
        got = moving_average(x, 10)
        assert np.allclose(got, np.cumsum(x) / np.arange(1, 7))

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            moving_average(np.ones(3), 0)


class TestSplit:
    def test_partition_is_exhaustive_and_disjoint(self):
        series = [np.full(120, v) for v in (0.71, 0.69, 0.75, 0.7025)]
        above, rest = split_by_final_mean(series, 0.7025)
        assert sorted(above + rest) == [0, 1, 2, 3]
        assert set(above).isdisjoint(rest)
        assert above == [0, 2]

    def test_uses_final_tail_only(self):
        x = np.concatenate([np.full(200, 0.2), np.full(100, 0.9)])
        above, rest = split_by_final_mean([x], 0.7025)
        assert above == [0]


class TestBand:
    def test_identical_sims_zero_band(self):
        series = [np.full(30, 0.5), np.full(30, 0.5)]
        band = group_band(series, 10, "sd")
        assert np.allclose(band.mean, 0.5)
        assert np.allclose(band.half_width, 0.0)

    def test_sdm_scales_by_sqrt_n(self):
        rng = np.random.default_rng(1)
        series = [rng.random(50) for _ in range(4)]
        sd = group_band(series, 5, "sd")
        sdm = group_band(series, 5, "sdm")
        assert np.allclose(sd.half_width / 2.0, sdm.half_width)
        assert np.allclose(sd.mean, sdm.mean)

    def test_band_bounds(self):
        series = [np.arange(10.0), np.arange(10.0) + 2.0]
        band = group_band(series, 1, "sd")
        assert np.allclose(band.upper - band.lower, 2 * band.half_width)


class TestReferences:
    def test_floored_classical_optimum(self):
        assert abs(floored_classical_optimum(0.1) - 0.7025) < 1e-12
        assert abs(floored_classical_optimum(0.0) - 0.75) < 1e-12

    def test_dominance_thresholds(self):
        lo, hi = dominance_thresholds_ebits()
        assert abs(lo - 0.298) < 1e-3
        assert abs(hi - 0.508) < 1e-3


class TestReadCsv:
    def test_reads_chsh(self, chsh_csv):
        data = read_run_csv(chsh_csv, "chsh")
        assert data.sims == [0, 1, 2]
        assert data.n_rounds == 150
        assert len(data.per_sim("winp")) == 3

    def test_reads_epd(self, epd_csv):
        data = read_run_csv(epd_csv, "epd")
        assert data.sims == [0, 1]
        assert data.per_sim("actA")[0][0] == "Q"

    def test_missing_column_reported(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("sim,round,winp\n0,1,0.5\n")
        with pytest.raises(SchemaError, match="expA"):
            read_run_csv(str(p), "chsh")

    def test_unknown_metric_column(self, chsh_csv):
        data = read_run_csv(chsh_csv, "chsh")
        with pytest.raises(SchemaError, match="cumA"):
            data.per_sim("cumA")
