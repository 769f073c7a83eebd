from pathlib import Path

import numpy as np
import pytest

from gcss.config import ExperimentConfig, Settings
from gcss.physics.errors import ConfigurationError

REFERENCE_FILE = Path(__file__).resolve().parent.parent / "configs" / "reference.ini"


class TestDefaults:
    def test_reference_setup(self):
        config = ExperimentConfig.load()
        assert config.gcss.alpha == 12.0
        assert config.gcss.delta_alpha == [-0.24, -1.44]
        assert config.trace.max_window == (10.0, 30.0)
        assert config.tau_grid().size == 1601
        assert config.qspec_params().q_orders == (11, 13)

    def test_reference_file_matches_defaults(self):
        config = ExperimentConfig.load(REFERENCE_FILE)
        defaults = ExperimentConfig()
        for section in ("pulse", "gcss", "trace", "sweep", "qspec"):
            assert getattr(config, section) == getattr(defaults, section), section
        assert config.wigner.half_width == pytest.approx(defaults.wigner.half_width)
        assert config.shg.wigner_half_width == pytest.approx(defaults.shg.wigner_half_width)
        assert config.shg.target_n2w == defaults.shg.target_n2w
        assert config.experiment.out == "results/reference"

    def test_resolved_is_json_ready(self):
        resolved = ExperimentConfig().resolved()
        assert resolved["trace"]["max_window"] == [10.0, 30.0]
        assert resolved["qspec"]["band_halfwidth"] is None

    def test_run_defaults(self):
        config = ExperimentConfig()
        assert config.trace.weighting == "conditioned"
        assert config.sweep.delta_alpha_stop == 3.0
        assert config.shg.target_n2w == 3.0
        assert config.qspec_params().emission == "poisson"


class TestLoading:
    def test_lists_are_split(self, write_config):
        config = ExperimentConfig.load(write_config({"gcss": {"delta_alpha": "-0.5, -1.0"}}))
        assert config.gcss.delta_alpha == [-0.5, -1.0]
        assert config.delta_alphas() == [-0.5, -1.0]

    def test_none_clears_optional(self, write_config):
        config = ExperimentConfig.load(write_config({"shg": {"target_n2w": "none"}}))
        assert config.shg.target_n2w is None

    def test_inline_comments(self, write_config):
        config = ExperimentConfig.load(write_config({"pulse": {"duration_fs": "30  # fs"}}))
        assert config.pulse_params().duration_fs == 30.0

    def test_unknown_section(self, write_config):
        with pytest.raises(ConfigurationError, match="unknown sections"):
            ExperimentConfig.load(write_config({"laser": {"power": "1"}}))

    def test_unknown_key(self, write_config):
        with pytest.raises(ConfigurationError, match="trace"):
            ExperimentConfig.load(write_config({"trace": {"tau_stride": "0.1"}}))

    def test_bad_value(self, write_config):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.load(write_config({"gcss": {"alpha": "twelve"}}))

    def test_unknown_state_kind(self, write_config):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.load(write_config({"trace": {"states": "coherent, squeezed"}}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            ExperimentConfig.load(tmp_path / "absent.ini")


class TestOverrides:
    def test_flags_win_over_file(self, write_config):
        config = ExperimentConfig.load(write_config({"experiment": {"seed": "3", "out": "from_file"}}))
        overridden = config.with_overrides(seed=5, threads=2)
        assert overridden.experiment.seed == 5
        assert overridden.experiment.out == "from_file"
        assert overridden.experiment.threads == 2

    def test_no_flags_keeps_config(self):
        config = ExperimentConfig()
        assert config.with_overrides() is config

    def test_invalid_thread_count(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig().with_overrides(threads=0)

    def test_settings_fill_the_gaps(self):
        settings = Settings(threads=4, output_dir="elsewhere")
        config = ExperimentConfig()
        assert config.thread_count(settings) == 4
        assert config.output_dir(settings) == Path("elsewhere")
        assert config.with_overrides(threads=2).thread_count(settings) == 2

    def test_environment_settings(self, monkeypatch):
        monkeypatch.setenv("GCSS_THREADS", "3")
        monkeypatch.setenv("GCSS_LOG_LEVEL", "DEBUG")
        settings = Settings()
        assert settings.threads == 3
        assert settings.log_level == "DEBUG"


class TestDerived:
    def test_yields_give_depletions(self, write_config):
        config = ExperimentConfig.load(write_config({"gcss": {"harmonic_yield": "0.0576"}}))
        assert config.delta_alphas() == [pytest.approx(-0.24)]

    def test_sweep_grid(self, write_config):
        config = ExperimentConfig.load(
            write_config({"sweep": {"delta_alpha_start": "0", "delta_alpha_stop": "0.29", "delta_alpha_step": "0.29"}})
        )
        np.testing.assert_allclose(config.sweep_grid(), [0.0, 0.29])

    def test_inverted_tau_grid(self, write_config):
        config = ExperimentConfig.load(write_config({"trace": {"tau_min": "10", "tau_max": "-10"}}))
        with pytest.raises(ConfigurationError):
            config.tau_grid()

    def test_phase_grid_follows_alpha(self):
        grid = ExperimentConfig().phase_grid(12.0)
        assert grid.center == pytest.approx((12.0 * np.sqrt(2.0), 0.0))

    def test_phase_grid_at_origin(self, write_config):
        config = ExperimentConfig.load(write_config({"wigner": {"center": "origin"}}))
        assert config.phase_grid(12.0).center == (0.0, 0.0)

    def test_shg_input_is_flat_topped(self):
        params = ExperimentConfig().shg_params()
        assert params.pulse.envelope == "flat"
        assert params.alpha == 4.0
