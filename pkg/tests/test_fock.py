import numpy as np
import pytest
from scipy.stats import poisson

from gcss.physics.errors import ConfigurationError, DimensionMismatchError, TruncationError
from gcss.physics.fock import (
    FockDensity,
    FockVector,
    coherent_fock,
    displacement_operator,
    embed,
    expectation_value,
    fock_state,
    identity,
    intensity_squared_operator,
    ladder_operators,
    partial_trace,
    tensor_product,
    vacuum,
)


class TestCoherentFock:
    def test_zero_amplitude_is_vacuum(self):
        state = coherent_fock(0.0, 10)
        expected = np.zeros(11)
        expected[0] = 1.0
        np.testing.assert_allclose(state.amplitudes, expected)

    def test_mean_photon_number(self):
        _, _, number = ladder_operators(40)
        assert expectation_value(number, coherent_fock(2.0, 40)).real == pytest.approx(4.0, abs=1e-10)

    def test_large_amplitude_norm(self):
        state = coherent_fock(12.0, 500)
        tail = poisson.sf(500, 144.0)
        assert state.norm() ** 2 >= 1.0 - 1e-10
        assert state.norm() ** 2 == pytest.approx(1.0 - tail, abs=1e-12)

    def test_amplitude_beyond_cutoff_raises(self):
        with pytest.raises(TruncationError):
            coherent_fock(5.0, 20)

    def test_phase(self):
        state = coherent_fock(2.0j, 40)
        assert np.angle(state.amplitudes[1]) == pytest.approx(np.pi / 2)


class TestLadder:
    def test_annihilation_on_one(self):
        a, _, _ = ladder_operators(5)
        np.testing.assert_allclose(a.apply(fock_state(1, 5)), vacuum(5).amplitudes)

    def test_number_on_five(self):
        _, _, number = ladder_operators(8)
        np.testing.assert_allclose(number.apply(fock_state(5, 8)), 5 * fock_state(5, 8).amplitudes)

    def test_commutator_below_boundary(self):
        n_max = 10
        a, a_dag, _ = ladder_operators(n_max)
        commutator = (a @ a_dag).dense() - (a_dag @ a).dense()
        np.testing.assert_allclose(commutator[:n_max, :n_max], np.eye(n_max), atol=1e-12)
        assert commutator[n_max, n_max] == pytest.approx(-n_max)

    def test_creation_is_adjoint(self):
        a, a_dag, _ = ladder_operators(6)
        np.testing.assert_allclose(a.dagger().dense(), a_dag.dense())


class TestDisplacement:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(displacement_operator(0.0, 20).dense(), np.eye(21), atol=1e-14)

    def test_displaced_vacuum_is_coherent(self):
        d = displacement_operator(1.5 - 0.5j, 80)
        np.testing.assert_allclose(d.apply(vacuum(80)), coherent_fock(1.5 - 0.5j, 80).amplitudes, atol=1e-9)
        assert d.unitarity_defect < 1e-6

    def test_amplitude_too_large_for_cutoff(self):
        with pytest.raises(TruncationError):
            displacement_operator(3.0, 20)


class TestTwoMode:
    def test_vacuum_product(self):
        state = tensor_product(vacuum(3), vacuum(2))
        assert state.dims == (4, 3)
        assert state.amplitudes[0] == 1.0
        assert np.count_nonzero(state.amplitudes) == 1

    def test_index_map(self):
        state = tensor_product(fock_state(2, 3), fock_state(1, 2))
        assert np.flatnonzero(state.amplitudes).tolist() == [2 * 3 + 1]

    def test_partial_trace_of_product(self):
        rho_a = coherent_fock(0.7, 12).projector()
        rho_b = FockDensity(np.diag([0.25, 0.75]))
        joint = tensor_product(rho_a, rho_b)
        np.testing.assert_allclose(partial_trace(joint, "fundamental").matrix, rho_a.matrix, atol=1e-12)
        np.testing.assert_allclose(partial_trace(joint, "harmonic").matrix, rho_b.matrix, atol=1e-12)

    def test_bell_like_state_reduces_to_maximally_mixed(self):
        amplitudes = np.zeros(4)
        amplitudes[0 * 2 + 1] = amplitudes[1 * 2 + 0] = 1.0 / np.sqrt(2.0)
        state = FockVector(amplitudes, (2, 2))
        np.testing.assert_allclose(partial_trace(state, 0).matrix, 0.5 * np.eye(2), atol=1e-15)

    def test_embed_number_operator(self):
        _, _, number = ladder_operators(3)
        lifted = embed(number, 1, (3, 4))
        state = tensor_product(fock_state(1, 2), fock_state(3, 3))
        assert expectation_value(lifted, state).real == pytest.approx(3.0)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(ConfigurationError):
            tensor_product(vacuum(2), vacuum(2).projector())


class TestExpectation:
    def test_number_on_three(self):
        _, _, number = ladder_operators(5)
        assert expectation_value(number, fock_state(3, 5)) == pytest.approx(3.0)

    def test_normal_ordered_square(self):
        a, a_dag, _ = ladder_operators(40)
        op = a_dag @ a_dag @ a @ a
        assert expectation_value(op, coherent_fock(2.0, 40)).real == pytest.approx(16.0, abs=1e-8)

    def test_intensity_squared_on_coherent(self):
        value = expectation_value(intensity_squared_operator(40), coherent_fock(2.0, 40))
        assert value.real == pytest.approx(20.0, abs=1e-8)

    def test_density_and_vector_agree(self):
        state = coherent_fock(1.2 + 0.4j, 30)
        op = intensity_squared_operator(30)
        assert expectation_value(op, state.projector()) == pytest.approx(expectation_value(op, state))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            expectation_value(identity(3), vacuum(5))


class TestValidation:
    def test_overnormalized_vector(self):
        with pytest.raises(ConfigurationError):
            FockVector([1.0, 1.0])

    def test_non_hermitian_density(self):
        with pytest.raises(ConfigurationError):
            FockDensity([[0.5, 0.1], [0.0, 0.5]])

    def test_leakage_counts_top_two_levels(self):
        amplitudes = np.zeros(6)
        amplitudes[4] = amplitudes[0] = np.sqrt(0.5)
        assert FockVector(amplitudes).leakage() == pytest.approx(0.5)

    def test_density_is_physical(self):
        rho = FockDensity(np.diag([0.5, 0.5, 0.0]))
        assert rho.is_physical()
        assert rho.purity() == pytest.approx(0.5)
