import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from abusetrends.cli import main
from abusetrends.ingest import load_series
from tests.conftest import write_csv

DATA = Path(__file__).parent / "data"


@pytest.fixture
def runner():
    return CliRunner()


def small_inputs(tmp_path):
    scored = write_csv(
        tmp_path / "scored.csv",
        ["id", "date", "p_off", "p_hate"],
        [(0, "2019-01-01", 0.9, 0.6), (1, "2019-01-01", 0.1, 0.1),
         (2, "2019-01-02", 0.8, 0.7), (3, "2019-01-02", 0.9, 0.2)],
    )
    counts = write_csv(
        tmp_path / "counts.csv",
        ["date", "count"],
        [("2019-01-01", 100), ("2019-01-02", 200)],
    )
    return scored, counts


class TestValidate:
    def test_happy_path(self, runner, tmp_path):
        scored, counts = small_inputs(tmp_path)
        result = runner.invoke(main, [
            "validate", "--scored", str(scored), "--counts", str(counts),
            "--start", "2019-01-01", "--end", "2019-01-02",
        ])
        assert result.exit_code == 0
        assert "scored rows accepted: 4" in result.output

    def test_missing_file_is_config_error(self, runner, tmp_path):
        _, counts = small_inputs(tmp_path)
        result = runner.invoke(main, [
            "validate", "--scored", str(tmp_path / "nope.csv"),
            "--counts", str(counts),
            "--start", "2019-01-01", "--end", "2019-01-02",
        ])
        assert result.exit_code == 2

    def test_count_gap_is_ingest_error(self, runner, tmp_path):
        scored, counts = small_inputs(tmp_path)
        result = runner.invoke(main, [
            "validate", "--scored", str(scored), "--counts", str(counts),
            "--start", "2019-01-01", "--end", "2019-01-03",
        ])
        assert result.exit_code == 3


class TestFilterCommand:
    def test_writes_proportions_and_adjusted(self, runner, tmp_path):
        scored, counts = small_inputs(tmp_path)
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "filter", "--scored", str(scored), "--counts", str(counts),
            "--start", "2019-01-01", "--end", "2019-01-02",
            "--filter", "25/50", "--outdir", str(out),
        ])
        assert result.exit_code == 0
        props = (out / "proportions.csv").read_text().splitlines()
        assert props[0] == "date,proportion,flag"
        assert props[1] == "2019-01-01,0.5,observed"
        assert props[2] == "2019-01-02,0.5,observed"
        adjusted = (out / "adjusted.csv").read_text().splitlines()
        assert adjusted[1] == "2019-01-01,50"
        assert adjusted[2] == "2019-01-02,100"

    def test_bad_notation_is_config_error(self, runner, tmp_path):
        scored, counts = small_inputs(tmp_path)
        result = runner.invoke(main, [
            "filter", "--scored", str(scored), "--counts", str(counts),
            "--start", "2019-01-01", "--end", "2019-01-02",
            "--filter", "200/5", "--outdir", str(tmp_path / "o"),
        ])
        assert result.exit_code == 2

    def test_outdir_env_var(self, runner, tmp_path, monkeypatch):
        scored, counts = small_inputs(tmp_path)
        target = tmp_path / "envout"
        monkeypatch.setenv("ABUSETRENDS_OUTDIR", str(target))
        result = runner.invoke(main, [
            "filter", "--scored", str(scored), "--counts", str(counts),
            "--start", "2019-01-01", "--end", "2019-01-02",
        ])
        assert result.exit_code == 0
        assert (target / "proportions.csv").exists()


class TestSimulateCommand:
    def test_writes_series(self, runner, tmp_path):
        out = tmp_path / "sim.csv"
        result = runner.invoke(main, [
            "simulate", "--mu", "20", "--lag", "1=const:0.4",
            "-T", "200", "--seed", "5", "--out", str(out),
        ])
        assert result.exit_code == 0
        series = load_series(out)
        assert len(series) == 200
        assert np.all(series.values >= 0)

    def test_unstable_curves_rejected(self, runner, tmp_path):
        result = runner.invoke(main, [
            "simulate", "--mu", "20", "--lag", "1=const:0.6", "--lag", "2=const:0.4",
            "-T", "100", "--seed", "5", "--out", str(tmp_path / "sim.csv"),
        ])
        assert result.exit_code == 2
        assert "stability" in result.output

    def test_deterministic(self, runner, tmp_path):
        args = ["simulate", "--mu", "pwl:0:5,1:15", "--lag", "1=0.3",
                "-T", "150", "--seed", "9"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, args + ["--out", str(a)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(b)]).exit_code == 0
        assert a.read_bytes() == b.read_bytes()


class TestSmoothCommand:
    def test_rolling_mean_roundtrip(self, runner, tmp_path):
        rows = [(f"2019-01-{d:02d}", 10 * d) for d in range(1, 15)]
        series = write_csv(tmp_path / "series.csv", ["date", "count"], rows)
        out = tmp_path / "smooth.csv"
        result = runner.invoke(main, [
            "smooth", "--series", str(series), "--method", "rolling",
            "--window", "7", "--out", str(out),
        ])
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "date,value"
        assert len(lines) == 15

    def test_accepts_covid_schema(self, runner, tmp_path):
        rows = [(f"2019-01-{d:02d}", 100 + d) for d in range(1, 10)]
        series = write_csv(tmp_path / "covid.csv", ["date", "new_cases"], rows)
        out = tmp_path / "smooth.csv"
        result = runner.invoke(main, [
            "smooth", "--series", str(series), "--method", "spline",
            "--penalty", "10", "--out", str(out),
        ])
        assert result.exit_code == 0

    def test_window_longer_than_series_is_config_error(self, runner, tmp_path):
        rows = [("2019-01-01", 1), ("2019-01-02", 2)]
        series = write_csv(tmp_path / "series.csv", ["date", "count"], rows)
        result = runner.invoke(main, [
            "smooth", "--series", str(series), "--window", "7",
            "--out", str(tmp_path / "o.csv"),
        ])
        assert result.exit_code == 2


class TestFitCommand:
    def test_fit_small_series(self, runner, tmp_path):
        sim = tmp_path / "sim.csv"
        assert runner.invoke(main, [
            "simulate", "--mu", "15", "--lag", "1=0.3",
            "-T", "120", "--seed", "3", "--out", str(sim),
        ]).exit_code == 0
        out = tmp_path / "fit"
        result = runner.invoke(main, [
            "fit", "--series", str(sim), "--lags", "2", "--mu-basis", "5",
            "--lag-basis", "4", "--iters", "400", "--burn", "150", "--thin", "5",
            "--seed", "7", "--outdir", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert (out / "fit_summary.csv").exists()
        assert (out / "fit_summary.json").exists()
        assert (out / "draws.json").exists()

    def test_too_short_series_is_model_error(self, runner, tmp_path):
        rows = [(f"2019-01-{d:02d}", d) for d in range(1, 9)]
        series = write_csv(tmp_path / "tiny.csv", ["date", "count"], rows)
        result = runner.invoke(main, [
            "fit", "--series", str(series), "--seed", "1",
            "--outdir", str(tmp_path / "o"),
        ])
        assert result.exit_code == 4


class TestReportCommand:
    def config_mapping(self, tmp_path, outdir):
        return {
            "scored": str(DATA / "scored_60d.csv"),
            "counts": str(DATA / "counts_60d.csv"),
            "start": "2019-01-01",
            "end": "2019-03-01",
            "filter": "25/0",
            "seed": 42,
            "outdir": str(outdir),
            "lag_order": 3,
            "n_iter": 300,
            "n_burn": 100,
            "thin": 4,
        }

    def test_full_pipeline_from_json_config(self, runner, tmp_path):
        out = tmp_path / "run"
        config = tmp_path / "config.json"
        config.write_text(json.dumps(self.config_mapping(tmp_path, out)))
        result = runner.invoke(main, ["report", "--config", str(config)])
        assert result.exit_code == 0, result.output
        for name in ("proportions.csv", "adjusted.csv", "fit_summary.csv",
                     "fit_summary.json", "draws.json", "run_manifest.json"):
            assert (out / name).exists()
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["seed"] == 42
        assert "sha256" in manifest["inputs"]["scored"]

    def test_toml_config_with_flag_override(self, runner, tmp_path):
        out = tmp_path / "run"
        mapping = self.config_mapping(tmp_path, tmp_path / "ignored")
        lines = []
        for key, value in mapping.items():
            if isinstance(value, str):
                lines.append(f'{key} = "{value}"')
            else:
                lines.append(f"{key} = {value}")
        config = tmp_path / "config.toml"
        config.write_text("\n".join(lines) + "\n")
        result = runner.invoke(main, [
            "report", "--config", str(config), "--outdir", str(out),
            "--set", "n_iter=250",
        ])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["config"]["outdir"] == str(out)
        assert manifest["config"]["n_iter"] == 250

    def test_missing_counts_file_exits_ingest_code_without_model_artifacts(
        self, runner, tmp_path
    ):
        out = tmp_path / "run"
        mapping = self.config_mapping(tmp_path, out)
        mapping["counts"] = str(tmp_path / "missing.csv")
        config = tmp_path / "config.json"
        config.write_text(json.dumps(mapping))
        result = runner.invoke(main, ["report", "--config", str(config)])
        assert result.exit_code == 2  # missing path is caught at validation
        assert not (out / "fit_summary.csv").exists()

    def test_stage_failure_leaves_partials_only(self, runner, tmp_path):
        out = tmp_path / "run"
        mapping = self.config_mapping(tmp_path, out)
        mapping["lag_order"] = 55  # too high for a 60-day window: fit fails
        config = tmp_path / "config.json"
        config.write_text(json.dumps(mapping))
        result = runner.invoke(main, ["report", "--config", str(config)])
        assert result.exit_code == 4
        assert "fit stage" in result.output
        assert not (out / "proportions.csv").exists()
        assert (out / "proportions.csv.partial").exists()
        assert not (out / "run_manifest.json").exists()

    def test_unknown_config_key_rejected(self, runner, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"scoredd": "x"}))
        result = runner.invoke(main, ["report", "--config", str(config)])
        assert result.exit_code == 2
