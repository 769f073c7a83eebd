import numpy as np
import pytest

from gcss.physics.errors import ConfigurationError, TruncationError
from gcss.physics.fock import FockDensity, coherent_fock, fock_state, tensor_product, vacuum
from gcss.physics.states import GcssParams, coherent_state, gcss_state, mixed_state, parity_cat
from gcss.physics.wigner import (
    PhaseGrid,
    marginal_x,
    wigner_analytic,
    wigner_extrema,
    wigner_fock,
)


class TestAnalytic:
    def test_vacuum_peak(self, origin_grid):
        w = wigner_analytic(coherent_state(0.0), origin_grid)
        assert w.at(0.0, 0.0) == pytest.approx(1.0 / np.pi)

    def test_coherent_peak_location(self):
        grid = PhaseGrid.around(3.0, 3.0, 41)
        extrema = wigner_extrema(wigner_analytic(coherent_state(3.0), grid))
        assert extrema.max_value == pytest.approx(1.0 / np.pi)
        assert extrema.max_location[0] == pytest.approx(np.sqrt(2.0) * 3.0)
        assert extrema.max_location[1] == pytest.approx(0.0, abs=1e-12)

    def test_odd_cat_is_negative_at_origin(self, origin_grid):
        w = wigner_analytic(parity_cat(2.0, -1), origin_grid)
        assert w.at(0.0, 0.0) == pytest.approx(-1.0 / np.pi, rel=1e-9)

    def test_normalized(self, origin_grid):
        w = wigner_analytic(coherent_state(0.5), origin_grid)
        assert w.integral() == pytest.approx(1.0, rel=1e-4)

    def test_gcss_has_negative_region(self):
        s = gcss_state(GcssParams(alpha=12.0, delta_alpha=-0.24), 0.0)
        extrema = wigner_extrema(wigner_analytic(s, PhaseGrid.around(12.0, 2.0, 41)))
        assert extrema.min_value < -0.25
        assert extrema.negative_volume > 0.0
        assert np.hypot(extrema.min_location[0] - np.sqrt(2.0) * 12.0, extrema.min_location[1]) < 0.5

    def test_mixture_is_non_negative(self):
        m = mixed_state(GcssParams(alpha=3.0, delta_alpha=-0.5), 0.0)
        w = wigner_analytic(m, PhaseGrid.around(3.0, 5.0, 41))
        assert w.values.min() >= 0.0
        assert w.integral() == pytest.approx(1.0, rel=1e-4)


class TestFock:
    def test_single_photon(self, origin_grid):
        w = wigner_fock(fock_state(1, 10), origin_grid)
        assert w.at(0.0, 0.0) == pytest.approx(-1.0 / np.pi)

    def test_matches_analytic(self, origin_grid):
        fock = wigner_fock(coherent_fock(2.0, 40), origin_grid)
        analytic = wigner_analytic(coherent_state(2.0), origin_grid)
        np.testing.assert_allclose(fock.values, analytic.values, atol=1e-8)

    def test_parity_method_agrees(self):
        grid = PhaseGrid.around(0.0, 1.0, 16)
        rho = coherent_fock(1.0, 20)
        laguerre = wigner_fock(rho, grid, "laguerre")
        parity = wigner_fock(rho, grid, "parity")
        np.testing.assert_allclose(parity.values, laguerre.values, atol=1e-6)

    def test_balanced_mixture_vanishes_at_origin(self, origin_grid):
        rho = FockDensity(np.diag([0.5, 0.5, 0.0, 0.0, 0.0]))
        assert wigner_fock(rho, origin_grid).at(0.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_negative_volume_of_single_photon(self, origin_grid):
        extrema = wigner_extrema(wigner_fock(fock_state(1, 10), origin_grid))
        # integral of the negative disk r^2 < 1/2: 2 exp(-1/2) - 1
        assert extrema.negative_volume == pytest.approx(2.0 * np.exp(-0.5) - 1.0, abs=5e-3)
        assert extrema.min_location == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_leakage_rejected(self, origin_grid):
        with pytest.raises(TruncationError):
            wigner_fock(coherent_fock(2.0, 8), origin_grid)

    def test_two_mode_rejected(self, origin_grid):
        with pytest.raises(ConfigurationError):
            wigner_fock(tensor_product(vacuum(3), vacuum(3)), origin_grid)

    def test_unknown_method(self, origin_grid):
        with pytest.raises(ConfigurationError):
            wigner_fock(vacuum(3), origin_grid, "husimi")


class TestGrid:
    def test_around_centers_on_alpha(self):
        grid = PhaseGrid.around(1.0 + 2.0j, 1.0, 21)
        assert grid.center == pytest.approx((np.sqrt(2.0), 2.0 * np.sqrt(2.0)))
        assert grid.x[10] == pytest.approx(np.sqrt(2.0))

    def test_beta_of_center(self):
        grid = PhaseGrid.around(1.0 - 1.0j, 1.0, 21)
        assert complex(grid.beta()[10, 10]) == pytest.approx(1.0 - 1.0j)

    @pytest.mark.parametrize(
        "kwargs",
        [{"nx": 10}, {"half_width_x": -1.0}, {"half_width_p": 0.0}, {"center": (np.nan, 0.0)}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            PhaseGrid(**kwargs)


def test_marginal_of_vacuum(origin_grid):
    marginal = marginal_x(wigner_analytic(coherent_state(0.0), origin_grid))
    assert marginal[20] == pytest.approx(1.0 / np.sqrt(np.pi), rel=1e-4)
