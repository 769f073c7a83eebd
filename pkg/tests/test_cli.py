"""End-to-end runs of the command line on reduced grids."""

import json

import numpy as np
import pytest
from loguru import logger

from gcss.main import GcssApp, build_parser
from gcss.utils.io import (
    read_columns,
    read_density_csv,
    read_histogram_csv,
    read_json,
    read_shots_csv,
    read_trace_csv,
    read_wigner_csv,
)


def summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def run(*argv):
    return GcssApp(log_level="WARNING").run(list(argv))


@pytest.fixture
def trace_config(write_config, reduced_trace):
    return write_config(
        {
            "gcss": {"delta_alpha": "-0.24"},
            "trace": reduced_trace,
            "wigner": {"points": 41},
        }
    )


@pytest.fixture
def shg_config(write_config):
    def make(**overrides):
        shg = {"n_max_w": 60, "n_max_2w": 30, "target_n2w": 3.0, "wigner_points": 41}
        shg.update(overrides)
        return write_config({"shg": shg}, name="shg.ini")

    return make


@pytest.fixture
def qspec_config(write_config):
    return write_config({"qspec": {"n_shots": 100000}}, name="qspec.ini")


class TestTrace:
    def test_metrics_and_files(self, trace_config, tmp_path, capsys):
        out = tmp_path / "out"
        assert run("trace", "--config", str(trace_config), "--out", str(out)) == 0
        result = summary(capsys)
        assert result["status"] == "ok"
        metrics = result["metrics"]
        assert metrics["coherent_0.24"]["s_zero"] == pytest.approx(1.0, abs=1e-12)
        assert metrics["coherent_0.24"]["m_depth"] == 0.0
        assert metrics["gcss_0.24"]["m_depth"] > metrics["mixture_0.24"]["m_depth"]
        for name in ("coherent_0.24", "gcss_0.24", "mixture_0.24"):
            for artifact in ("trace_raw.csv", "trace_iac.csv", "wigner.csv"):
                assert (out / name / artifact).is_file()

    def test_metrics_file(self, trace_config, tmp_path, capsys):
        out = tmp_path / "out"
        run("trace", "--config", str(trace_config), "--out", str(out))
        stored = read_json(out / "metrics.json")
        assert stored["alpha"] == 12.0
        assert stored["states"]["gcss_0.24"]["wigner"]["min_value"] < 0.0
        assert stored["states"]["mixture_0.24"]["wigner"]["min_value"] >= 0.0
        # QS-off output is the coherent state |alpha + delta_alpha>, off the grid center
        field = read_wigner_csv(out / "coherent_0.24" / "wigner.csv")
        assert field.values.shape == (41, 41)
        assert 0.95 / np.pi < field.values.max() <= 1.0 / np.pi

    def test_stored_trace_matches_summary(self, trace_config, tmp_path, capsys):
        out = tmp_path / "out"
        run("trace", "--config", str(trace_config), "--out", str(out))
        result = summary(capsys)
        iac = read_trace_csv(out / "gcss_0.24" / "trace_iac.csv")
        assert iac.delays[0] == pytest.approx(-40.0)
        assert iac.nearest(0.0) == result["metrics"]["gcss_0.24"]["s_zero"]

    def test_depletion_trend(self, write_config, reduced_trace, tmp_path, capsys):
        path = write_config({"gcss": {"delta_alpha": "-0.24, -1.44"}, "trace": reduced_trace})
        assert run("trace", "--config", str(path), "--out", str(tmp_path / "out")) == 0
        metrics = summary(capsys)["metrics"]
        for magnitude in ("0.24", "1.44"):
            assert metrics[f"coherent_{magnitude}"]["s_zero"] == pytest.approx(1.0, abs=1e-12)
            assert metrics[f"mixture_{magnitude}"]["m_depth"] < 0.05
            assert metrics[f"gcss_{magnitude}"]["m_depth"] > metrics[f"mixture_{magnitude}"]["m_depth"]
        small, large = metrics["gcss_0.24"], metrics["gcss_1.44"]
        assert small["s_zero"] < large["s_zero"] < 1.0
        assert small["m_depth"] > large["m_depth"] > 0.02
        # a classical mixture does not produce the suppression
        assert small["m_depth"] > 5.0 * metrics["mixture_0.24"]["m_depth"]

    def test_missing_config(self, tmp_path, capsys):
        assert run("trace", "--config", str(tmp_path / "absent.ini")) == 2
        result = summary(capsys)
        assert result["status"] == "error"
        assert result["error"] == "ConfigurationError"

    def test_dry_run_prints_resolved_config(self, trace_config, tmp_path, capsys):
        out = tmp_path / "out"
        assert run("trace", "--config", str(trace_config), "--out", str(out), "--dry-run") == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["dry_run"] is True
        assert printed["config"]["trace"]["tau_step"] == 0.2
        assert printed["config"]["trace"]["weighting"] == "conditioned"
        assert printed["config"]["experiment"]["out"] == str(out)
        assert not out.exists()

    def test_log_records_carry_the_run(self, trace_config, tmp_path, capsys):
        app = GcssApp(log_level="WARNING")
        seen = []
        sink = logger.add(lambda message: seen.append(message.record["extra"]["run"]), level="INFO")
        try:
            app.run(["trace", "--config", str(trace_config), "--out", str(tmp_path / "out"), "--dry-run"])
        finally:
            logger.remove(sink)
        assert seen
        assert all(tag.startswith("reference/trace#") for tag in seen)
        assert len(set(seen)) == 1


class TestSweep:
    def test_flags_small_depletion(self, write_config, reduced_trace, tmp_path, capsys):
        path = write_config(
            {
                "trace": reduced_trace,
                "sweep": {"alphas": 30, "delta_alpha_start": 0, "delta_alpha_stop": 0.29, "delta_alpha_step": 0.29},
            }
        )
        out = tmp_path / "sweep"
        assert run("sweep", "--config", str(path), "--out", str(out)) == 0
        assert summary(capsys)["rows"] == 2
        rows = read_columns(out / "sweep.csv", ("delta_alpha", "coherent_limit", "gcss_deviates"))
        np.testing.assert_allclose(rows["delta_alpha"], [0.0, 0.29])
        assert rows["coherent_limit"].tolist() == [1.0, 0.0]
        assert rows["gcss_deviates"].tolist() == [0.0, 1.0]

    def test_deviation_closes_at_large_alpha(self, write_config, reduced_trace, tmp_path, capsys):
        path = write_config(
            {
                "trace": reduced_trace,
                "sweep": {"alphas": 30, "delta_alpha_start": 0.29, "delta_alpha_stop": 4.0, "delta_alpha_step": 3.71},
            }
        )
        out = tmp_path / "sweep"
        assert run("sweep", "--config", str(path), "--out", str(out)) == 0
        result = summary(capsys)
        assert result["deviation_below"]["30"] == pytest.approx(4.0)
        rows = read_columns(out / "sweep.csv", ("delta_alpha", "gcss_deviates", "gcss_s_zero"))
        assert rows["gcss_deviates"].tolist() == [1.0, 0.0]
        assert rows["gcss_s_zero"][1] == pytest.approx(1.0, abs=0.01)


class TestShg:
    def test_coherent_harmonic_stays_classical(self, shg_config, tmp_path, capsys):
        out = tmp_path / "shg"
        assert run("shg", "--config", str(shg_config()), "--out", str(out)) == 0
        result = summary(capsys)
        assert result["inputs"]["coherent"]["n_2w"] == pytest.approx(3.0, rel=2e-3)
        assert result["inputs"]["coherent"]["w_min"] >= -1e-10
        assert result["inputs"]["gcss"]["w_min"] < 0.0
        for kind in ("coherent", "gcss"):
            for artifact in ("trajectory.json", "rho_2w.csv", "wigner_2w.csv"):
                assert (out / kind / artifact).is_file()

    def test_stored_density(self, shg_config, tmp_path, capsys):
        out = tmp_path / "shg"
        assert run("shg", "--config", str(shg_config(inputs="gcss")), "--out", str(out)) == 0
        result = summary(capsys)
        rho = read_density_csv(out / "gcss" / "rho_2w.csv")
        assert rho.matrix.shape == (31, 31)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-8)
        n_2w = float(np.sum(np.arange(31) * np.diag(rho.matrix).real))
        assert n_2w == pytest.approx(result["inputs"]["gcss"]["n_2w"], rel=1e-9)

    def test_zero_duration_gives_vacuum(self, shg_config, tmp_path, capsys):
        out = tmp_path / "shg"
        path = shg_config(t_final=0, target_n2w="none", inputs="coherent")
        assert run("shg", "--config", str(path), "--out", str(out)) == 0
        result = summary(capsys)
        assert result["inputs"]["coherent"]["n_2w"] == pytest.approx(0.0, abs=1e-12)
        trajectory = read_json(out / "coherent" / "trajectory.json")
        assert trajectory["wigner_2w"]["max_value"] == pytest.approx(1.0 / np.pi)
        assert trajectory["input"] == "coherent"

    def test_small_cutoff_is_numerical_failure(self, shg_config, tmp_path, capsys):
        path = shg_config(n_max_w=10)
        assert run("shg", "--config", str(path), "--out", str(tmp_path / "shg")) == 3
        assert summary(capsys)["error"] == "TruncationError"


class TestQspec:
    def test_seed_reproduces_shots(self, qspec_config, tmp_path, capsys):
        for name in ("a", "b"):
            assert run("qspec", "--config", str(qspec_config), "--out", str(tmp_path / name), "--seed", "4") == 0
        capsys.readouterr()
        first = (tmp_path / "a" / "shots.csv").read_bytes()
        assert first == (tmp_path / "b" / "shots.csv").read_bytes()

    def test_report_without_truth(self, qspec_config, tmp_path, capsys):
        out = tmp_path / "qspec"
        assert run("qspec", "--config", str(qspec_config), "--out", str(out)) == 0
        result = summary(capsys)
        assert result["n_selected"] >= 100
        report = read_json(out / "report.json")
        assert report["seed"] == 0
        assert "enrichment" not in report
        header = (out / "shots.csv").read_text().splitlines()[0]
        assert header == "s_ir,s_hh,s_0"
        hist = read_histogram_csv(out / "pn_hist.csv")
        assert hist.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        assert hist.bin_width == pytest.approx(20.0)

    def test_truth_columns_on_request(self, qspec_config, tmp_path, capsys):
        out = tmp_path / "qspec"
        assert run("qspec", "--config", str(qspec_config), "--out", str(out), "--with-truth") == 0
        result = summary(capsys)
        header = (out / "selected.csv").read_text().splitlines()[0]
        assert header.split(",")[-2:] == ["is_hhg_event", "ir_loss"]
        assert read_json(out / "report.json")["enrichment"] > 50.0
        selected = read_shots_csv(out / "selected.csv")
        assert selected.has_truth
        assert len(selected) == result["n_selected"]
        assert selected.is_hhg_event.any()


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


@pytest.mark.parametrize("verb", ["trace", "sweep"])
def test_help_documents_weighting(verb, capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args([verb, "--help"])
    text = capsys.readouterr().out
    assert "weighting = conditioned (default)" in text
    assert "normalized" in text
