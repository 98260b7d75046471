import os

import numpy as np
import pytest

from qgames_figures.cli import main
from qgames_figures.plots import PlotSpec, RenderResult, render
from qgames_figures.series import floored_classical_optimum, moving_average, read_run_csv


class TestRenderChsh:
    def test_winprob_reference_line_and_groups(self, chsh_csv, tmp_path):
        out = tmp_path / "winprob.png"
        spec = PlotSpec(inputs=[chsh_csv], game="chsh", metric="winprob", out=str(out))
        result = render(spec)
        assert os.path.getsize(out) > 0
        assert result.reference_lines["classical_optimum"] == pytest.approx(0.7025)
        assert set(result.groups) == {"above", "rest"}
        # sims 0 and 1 sit above the floored optimum, sim 2 below
        data = read_run_csv(chsh_csv, "chsh")
        expect_above = np.vstack([
            moving_average(data.per_sim("winp")[i], 10) for i in (0, 1)
        ]).mean(axis=0)
        assert np.allclose(result.groups["above"]["winp"].mean, expect_above)

    def test_window_one_identity_single_sim(self, chsh_constant_csv, tmp_path):
        out = tmp_path / "id.png"
        spec = PlotSpec(inputs=[chsh_constant_csv], game="chsh", metric="winprob",
                        out=str(out), window=1, split=False)
        result = render(spec)
        data = read_run_csv(chsh_constant_csv, "chsh")
        band = result.groups["above"]["winp"]
        assert np.array_equal(band.mean, data.per_sim("winp")[0])
        assert np.allclose(band.half_width, 0.0)  # identical sims, zero band

    def test_entanglement_reference(self, chsh_csv, tmp_path):
        out = tmp_path / "ent.png"
        spec = PlotSpec(inputs=[chsh_csv], game="chsh", metric="entanglement",
                        out=str(out), game_state_ebits=0.7)
        result = render(spec)
        assert result.reference_lines["game_state_ebits"] == pytest.approx(0.7)
        assert "entA" in next(iter(result.groups.values()))

    def test_constant_group_sits_at_threshold(self, chsh_constant_csv, tmp_path):
        # a series exactly at the optimum is not "above" (strict inequality)
        out = tmp_path / "const.png"
        spec = PlotSpec(inputs=[chsh_constant_csv], game="chsh", metric="winprob",
                        out=str(out))
        result = render(spec)
        assert set(result.groups) == {"rest"}


class TestRenderEpd:
    def test_payoff_curves(self, epd_csv, tmp_path):
        out = tmp_path / "pay.png"
        spec = PlotSpec(inputs=[epd_csv], game="epd", metric="payoff", out=str(out))
        result = render(spec)
        assert os.path.getsize(out) > 0
        data = read_run_csv(epd_csv, "epd")
        assert np.allclose(result.raw_curves["cumA"][0], data.per_sim("cumA")[0])
        assert len(result.raw_curves["cumB"]) == 2

    def test_dominance_diagram(self, tmp_path):
        out = tmp_path / "dom.png"
        spec = PlotSpec(inputs=[], game="epd", metric="dominance", out=str(out))
        result = render(spec)
        assert os.path.getsize(out) > 0
        assert abs(result.reference_lines["threshold_low_ebits"] - 0.298) < 1e-3
        assert abs(result.reference_lines["threshold_high_ebits"] - 0.508) < 1e-3


class TestSpecValidation:
    def test_metric_game_mismatch(self):
        with pytest.raises(ValueError, match="invalid for game"):
            PlotSpec(inputs=["x.csv"], game="chsh", metric="payoff", out="o.png")

    def test_window_validation(self):
        with pytest.raises(ValueError, match="window"):
            PlotSpec(inputs=["x.csv"], game="chsh", metric="winprob", out="o.png",
                     window=0)

    def test_missing_inputs(self):
        with pytest.raises(ValueError, match="input"):
            PlotSpec(inputs=[], game="epd", metric="payoff", out="o.png")


class TestCli:
    def test_cli_renders(self, chsh_csv, tmp_path, capsys):
        out = tmp_path / "cli.png"
        rc = main(["--input", chsh_csv, "--game", "chsh", "--metric", "winprob",
                   "--window", "10", "--out", str(out)])
        assert rc == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_cli_schema_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("sim,round\n0,1\n")
        rc = main(["--input", str(bad), "--game", "chsh", "--metric", "winprob",
                   "--out", str(tmp_path / "x.png")])
        assert rc == 1
        assert "missing required column" in capsys.readouterr().err

    def test_cli_dominance_without_input(self, tmp_path):
        out = tmp_path / "dom.png"
        rc = main(["--game", "epd", "--metric", "dominance", "--out", str(out)])
        assert rc == 0
        assert out.exists()
