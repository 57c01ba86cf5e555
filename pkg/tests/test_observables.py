import numpy as np
import pytest
from scipy.linalg import expm

from bosonboson.liouville import annihilation
from bosonboson.observables import (CavityState, find_t_star,
                                    photon_statistics,
                                    steady_state_occupation, wigner)


def coherent_state(alpha, d):
    a = annihilation(d)
    disp = expm(alpha * a.conj().T - np.conj(alpha) * a)
    psi = disp[:, 0]
    return np.outer(psi, psi.conj())


def fock_state(n, d):
    rho = np.zeros((d, d), dtype=complex)
    rho[n, n] = 1.0
    return rho


class TestCavityState:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            CavityState(np.zeros((2, 3)))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            CavityState(0.5 * fock_state(0, 3))

    def test_rejects_non_hermitian(self):
        rho = fock_state(0, 3)
        rho[0, 1] = 0.1
        with pytest.raises(ValueError, match="Hermitian"):
            CavityState(rho)

    def test_rejects_negative_eigenvalue(self):
        rho = np.diag([1.2, -0.2, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="negative"):
            CavityState(rho)

    def test_accepts_valid_state(self):
        state = CavityState(coherent_state(0.7, 12))
        assert state.dim == 12


class TestPhotonStatistics:
    def test_coherent_state_is_poissonian(self):
        nbar = 0.49
        stats = photon_statistics(CavityState(coherent_state(0.7, 25)))
        assert stats.mean == pytest.approx(nbar, rel=1e-10)
        assert stats.g2 == pytest.approx(1.0, rel=1e-9)
        assert stats.g2_defined

    def test_fock_one_has_zero_g2(self):
        stats = photon_statistics(CavityState(fock_state(1, 4)))
        assert stats.mean == pytest.approx(1.0)
        assert stats.g2 == 0.0

    def test_fock_two(self):
        stats = photon_statistics(CavityState(fock_state(2, 5)))
        # <n(n-1)>/<n>^2 = 2/4
        assert stats.g2 == pytest.approx(0.5)

    def test_vacuum_g2_undefined(self):
        stats = photon_statistics(CavityState(fock_state(0, 3)))
        assert not stats.g2_defined
        assert np.isnan(stats.g2)

    def test_matches_trace_formula(self):
        rng = np.random.default_rng(7)
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho = m @ m.conj().T
        rho /= np.trace(rho).real
        a = annihilation(6)
        stats = photon_statistics(CavityState(rho))
        mean = np.trace(a.conj().T @ a @ rho).real
        pair = np.trace(a.conj().T @ a.conj().T @ a @ a @ rho).real
        assert stats.mean == pytest.approx(mean, rel=1e-12)
        assert stats.g2 == pytest.approx(pair / mean ** 2, rel=1e-12)

    def test_populations_sum_to_one(self):
        stats = photon_statistics(CavityState(coherent_state(0.4, 15)))
        assert stats.populations.sum() == pytest.approx(1.0, abs=1e-10)


class TestWigner:
    def test_vacuum_peak(self):
        grid = wigner(CavityState(fock_state(0, 3)), extent=4.0, points=41)
        i = np.argmin(np.abs(grid.p))
        j = np.argmin(np.abs(grid.x))
        assert grid.values[i, j] == pytest.approx(2.0 / np.pi, rel=1e-8)
        assert grid.min_value > -1e-10

    def test_single_photon_negative_at_origin(self):
        grid = wigner(CavityState(fock_state(1, 4)), extent=4.0, points=41)
        i = np.argmin(np.abs(grid.p))
        j = np.argmin(np.abs(grid.x))
        assert grid.values[i, j] == pytest.approx(-2.0 / np.pi, rel=1e-6)
        assert grid.min_value <= -0.6
        x_min, p_min = grid.min_location()
        assert abs(x_min) < 1e-9 and abs(p_min) < 1e-9

    def test_coherent_state_displaced_gaussian(self):
        grid = wigner(CavityState(coherent_state(1.0, 18)), points=41)
        i = np.argmin(np.abs(grid.p))
        j = np.argmin(np.abs(grid.x - 1.0))
        assert grid.values[i, j] == pytest.approx(2.0 / np.pi, rel=1e-6)

    def test_grid_normalization(self):
        grid = wigner(CavityState(fock_state(1, 4)), points=61)
        assert grid.normalization == pytest.approx(1.0, abs=0.02)

    def test_warns_when_grid_misses_mass(self):
        with pytest.warns(UserWarning, match="narrow"):
            wigner(CavityState(coherent_state(2.5, 25)), extent=2.0, points=21)

    def test_warns_on_truncated_state(self):
        rho = np.diag([0.6, 0.2, 0.2]).astype(complex)
        with pytest.warns(UserWarning, match="top Fock level"):
            wigner(CavityState(rho), extent=3.0, points=11)

    def test_values_real_for_random_hermitian_state(self):
        rng = np.random.default_rng(11)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = m @ m.conj().T
        rho /= np.trace(rho).real
        grid = wigner(CavityState(rho), points=21)
        assert grid.values.dtype == np.float64
        assert np.all(np.isfinite(grid.values))


class TestTStar:
    def test_earliest_maximum_wins(self):
        times = np.array([0.0, 1.0, 2.0, 3.0])
        flat = fock_state(0, 3)
        peak = 0.6 * fock_state(0, 3) + 0.4 * fock_state(1, 3)
        states = [flat, peak, peak, flat]
        t_star, idx = find_t_star(times, states)
        assert t_star == 1.0 and idx == 1

    def test_picks_global_max(self):
        times = np.linspace(0.0, 5.0, 6)
        states = [(1 - p) * fock_state(0, 3) + p * fock_state(1, 3)
                  for p in (0.0, 0.2, 0.5, 0.3, 0.7, 0.1)]
        t_star, idx = find_t_star(times, states)
        assert idx == 4


class TestSteadyStateFit:
    def synth(self, n_inf, nu, r=0.075, c=0.4):
        t = np.arange(10.0, 30.0, 0.2)
        y = n_inf + np.exp(-r * t) * (0.3 * np.cos(nu * t)
                                      - 0.5 * np.sin(nu * t))
        return t, y + c * np.exp(-2 * r * t)

    def test_recovers_level_exactly(self):
        t, y = self.synth(0.061, 0.47)
        fit = steady_state_occupation(t, y, 0.075, (0.0, 1.0))
        assert fit.value == pytest.approx(0.061, abs=1e-5)
        assert fit.frequency == pytest.approx(0.47, abs=5e-3)
        assert fit.residual < 1e-6

    def test_tolerates_noise(self):
        rng = np.random.default_rng(3)
        t, y = self.synth(0.12, 0.3)
        y = y + rng.normal(scale=2e-4, size=y.size)
        fit = steady_state_occupation(t, y, 0.075, (0.0, 1.0))
        assert fit.value == pytest.approx(0.12, abs=2e-3)

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError, match="samples"):
            steady_state_occupation([0, 1, 2], [1.0, 1.0, 1.0],
                                    0.1, (0.0, 1.0))
