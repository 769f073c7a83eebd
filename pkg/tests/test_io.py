import numpy as np
import pytest

from gcss.physics.autocorr import Trace
from gcss.physics.errors import ConfigurationError
from gcss.physics.fock import FockDensity
from gcss.physics.qspec import PnHistogram, ShotBatch
from gcss.utils.io import (
    read_columns,
    read_density_csv,
    read_histogram_csv,
    read_shots_csv,
    read_trace_csv,
    read_trace_json,
    write_columns,
    write_density_csv,
    write_histogram_csv,
    write_shots_csv,
    write_trace_csv,
    write_trace_json,
)


@pytest.fixture
def trace():
    rng = np.random.default_rng(3)
    delays = np.linspace(-80.0, 80.0, 1601)
    return Trace(delays, rng.random(1601) / 3.0, rng.random(1601) * 1e-7)


class TestTraceFiles:
    def test_csv_is_exact(self, trace, tmp_path):
        stored = read_trace_csv(write_trace_csv(trace, tmp_path / "trace.csv"))
        np.testing.assert_array_equal(stored.delays, trace.delays)
        np.testing.assert_array_equal(stored.values, trace.values)
        np.testing.assert_array_equal(stored.sigma, trace.sigma)

    def test_json_is_exact(self, trace, tmp_path):
        stored = read_trace_json(write_trace_json(trace, tmp_path / "trace.json"))
        np.testing.assert_array_equal(stored.values, trace.values)
        np.testing.assert_array_equal(stored.sigma, trace.sigma)
        assert stored.uniform == trace.uniform


def test_density_file(tmp_path):
    matrix = np.array([[0.75, 0.25 - 0.1j], [0.25 + 0.1j, 0.25]])
    stored = read_density_csv(write_density_csv(FockDensity(matrix), tmp_path / "rho.csv"))
    np.testing.assert_array_equal(stored.matrix, matrix)


def test_shots_file_keeps_truth(tmp_path):
    batch = ShotBatch(
        np.array([1000.0, 890.0]),
        np.array([0.5, 99.0]),
        np.array([1000.0, 1000.0]),
        np.array([False, True]),
        np.array([0.0, 1100.0]),
    )
    stored = read_shots_csv(write_shots_csv(batch, tmp_path / "shots.csv", with_truth=True))
    assert stored.is_hhg_event.tolist() == [False, True]
    np.testing.assert_array_equal(stored.ir_loss, batch.ir_loss)
    np.testing.assert_array_equal(stored.s_hh, batch.s_hh)


def test_truth_columns_need_truth(tmp_path):
    with pytest.raises(ConfigurationError):
        write_shots_csv(ShotBatch(np.ones(3), np.ones(3)), tmp_path / "shots.csv", with_truth=True)


def test_histogram_file(tmp_path):
    hist = PnHistogram(np.array([1090.0, 1110.0, 1130.0]), np.array([0.625, 0.375]))
    stored = read_histogram_csv(write_histogram_csv(hist, tmp_path / "hist.csv"))
    np.testing.assert_array_equal(stored.edges, hist.edges)
    np.testing.assert_array_equal(stored.probabilities, hist.probabilities)


def test_missing_column(tmp_path):
    path = write_columns(tmp_path / "table.csv", ("a", "b"), (np.arange(3.0), np.arange(3.0)))
    with pytest.raises(ConfigurationError):
        read_columns(path, ("a", "c"))
