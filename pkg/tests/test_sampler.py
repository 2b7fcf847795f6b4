import math

import numpy as np
import pytest

from maxent_states.distributions import discretize
from maxent_states.ensemble import build_ensemble
from maxent_states.fock_space import LN2, SystemPartition, popcounts, spectral_density
from maxent_states.sampler import (
    PureState,
    entanglement_entropy,
    measure_charge_distribution,
    mixed_state_check,
    monte_carlo_entropy,
    reduced_density_matrix,
    renyi_entropy,
    sample_state,
    schmidt_spectrum,
    state_entropy,
)


def ensemble(n, kind="spectral", **params):
    s = spectral_density(n)
    return build_ensemble(discretize(kind, s, **params), s)


def basis(n, *indices):
    v = np.zeros(2 ** n, dtype=complex)
    v[list(indices)] = 1
    return PureState.from_unnormalized(v)


class TestKnownStates:
    def test_bell(self):
        bell = basis(2, 0b00, 0b11)
        rho = reduced_density_matrix(bell, SystemPartition(2, 1))
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-15)
        assert entanglement_entropy(rho) == pytest.approx(LN2, rel=1e-14)
        assert renyi_entropy(rho, 2) == pytest.approx(LN2, rel=1e-14)

    def test_product_is_unentangled(self):
        psi = basis(5, 0b10110)
        for n_a in range(1, 5):
            assert state_entropy(psi, SystemPartition(5, n_a)) == 0.0

    @pytest.mark.parametrize("n", [3, 6, 9])
    def test_ghz_any_cut(self, n):
        ghz = basis(n, 0, 2 ** n - 1)
        for n_a in range(1, n):
            assert state_entropy(ghz, SystemPartition(n, n_a)) == pytest.approx(LN2, rel=1e-13)

    def test_renyi_ordering(self):
        psi = sample_state(ensemble(8), 3)
        rho = reduced_density_matrix(psi, SystemPartition(8, 3))
        s1, s2, s3 = entanglement_entropy(rho), renyi_entropy(rho, 2), renyi_entropy(rho, 3)
        assert s1 >= s2 >= s3 > 0
        with pytest.raises(ValueError):
            renyi_entropy(rho, 1)

    def test_schmidt_spectrum_same_from_both_sides(self):
        psi = sample_state(ensemble(9, "flat"), 11)
        for n_a in (3, 6):
            cut = SystemPartition(9, n_a)
            m = psi.matrix(cut)
            rho_a = np.linalg.eigvalsh(m @ m.conj().T)
            rho_b = np.linalg.eigvalsh(m.T @ m.conj())
            top = min(cut.dim_a, cut.dim_b)
            np.testing.assert_allclose(np.sort(rho_a)[::-1][:top], np.sort(rho_b)[::-1][:top], atol=1e-13)
            np.testing.assert_allclose(np.sort(schmidt_spectrum(psi, cut))[::-1][:top], np.sort(rho_a)[::-1][:top],
                                       atol=1e-13)
            rho = reduced_density_matrix(psi, cut)
            assert entanglement_entropy(rho) == pytest.approx(state_entropy(psi, cut), rel=1e-11)

    def test_state_validation(self):
        with pytest.raises(ValueError):
            PureState(np.ones(3) / math.sqrt(3))
        with pytest.raises(ValueError):
            PureState(np.ones(4))


class TestSampling:
    def test_normalized_and_deterministic(self):
        e = ensemble(10, "gaussian", q_bar=0.0, delta_q=1.0)
        a, b = sample_state(e, 42), sample_state(e, 42)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
        assert abs(np.vdot(a.amplitudes, a.amplitudes).real - 1) < 1e-12
        assert not np.array_equal(a.amplitudes, sample_state(e, 43).amplitudes)

    def test_microcanonical_support(self):
        e = ensemble(8, "microcanonical", q0=1.0)
        psi = sample_state(e, 0)
        outside = popcounts(8) != 5
        assert np.all(psi.amplitudes[outside] == 0)
        np.testing.assert_allclose(measure_charge_distribution(psi), np.eye(9)[5], atol=1e-14)

    def test_refuses_large_n(self):
        with pytest.raises(ValueError):
            sample_state(ensemble(25), 0)

    def test_measured_charge_tracks_input(self):
        e = ensemble(12, "gaussian", q_bar=0.0, delta_q=1.5)
        draws = np.array([measure_charge_distribution(sample_state(e, i)) for i in range(400)])
        mean, err = draws.mean(axis=0), draws.std(axis=0, ddof=1) / 20
        assert np.all(np.abs(mean - e.sector_weights()) <= 4 * err + 1e-12)

    def test_normalization_bias_in_tiny_sectors(self):
        # one-dimensional sectors carry exponential weights; dividing by the total norm
        # pulls their mean Born weight below p and pushes the big middle sector above it
        e = ensemble(10, "cat_product", blocks=2, block_size=5)
        draws = np.array([measure_charge_distribution(sample_state(e, i)) for i in range(400)])
        mean = draws.mean(axis=0)
        assert mean[0] < 0.25 and mean[10] < 0.25 and mean[5] > 0.5
        assert mean.sum() == pytest.approx(1.0, rel=1e-12)

    def test_workers_do_not_change_results(self):
        e = ensemble(8, "flat")
        cut = SystemPartition(8, 4)
        one = monte_carlo_entropy(e, cut, 40, seed=5, workers=1)
        three = monte_carlo_entropy(e, cut, 40, seed=5, workers=3)
        np.testing.assert_array_equal(one.values, three.values)
        assert one.mean == three.mean and one.stderr == three.stderr


class TestEnsembleAverage:
    def test_average_is_diagonal_ensemble(self):
        e = ensemble(6, "gaussian", q_bar=0.5, delta_q=0.8)
        check = mixed_state_check(e, 4000, seed=1)
        rho_max = e.rho_sector.max()
        assert check.max_offdiag < 6 * rho_max / math.sqrt(4000)
        assert check.max_diag_dev < 6 * rho_max / math.sqrt(4000)
        assert np.trace(check.average).real == pytest.approx(1.0, rel=1e-12)

    def test_error_halves_with_four_times_samples(self):
        e = ensemble(5)
        small = [mixed_state_check(e, 500, seed=s).max_offdiag for s in range(6)]
        large = [mixed_state_check(e, 2000, seed=s).max_offdiag for s in range(6)]
        assert np.mean(large) / np.mean(small) == pytest.approx(0.5, rel=0.3)

    def test_dense_limit(self):
        with pytest.raises(ValueError):
            mixed_state_check(ensemble(13), 2, 0)

    def test_page_value_and_self_averaging(self):
        cut10, cut14 = SystemPartition(10, 5), SystemPartition(14, 7)
        r10 = monte_carlo_entropy(ensemble(10), cut10, 200, seed=2)
        r14 = monte_carlo_entropy(ensemble(14), cut14, 200, seed=2)
        assert r14.std < r10.std
        for r, m in ((r10, 32), (r14, 128)):
            assert abs(r.mean - exact_page(m, m)) < 4 * r.stderr


def exact_page(m, n):
    """Finite-size Haar average of the entanglement entropy for an m x n split, m <= n."""
    return sum(1 / k for k in range(n + 1, m * n + 1)) - (m - 1) / (2 * n)
