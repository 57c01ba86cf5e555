import numpy as np
import pytest

from bosonboson.bath import BathSpec, SignedTimeTuple, f2, wick_exponent_from_f2
from bosonboson.liouville import driven_cavity_expectations, liouvillian, vec, unvec
from bosonboson.oracles import (DiscreteBath, SingleModeSpec, discretize_bath,
                                full_path_sum, gaussian_correlator_oracle,
                                matched_single_mode, single_mode_dynamics)
from bosonboson.tempo import SystemSpec
from scipy.linalg import expm


@pytest.fixture(scope="module")
def bath16():
    return discretize_bath(BathSpec(alpha=0.2, s=1.0, omega_c=1.0), n_modes=16)


def random_balanced_tuple(rng, n_pairs=2, t_max=3.0):
    signs = np.repeat([1, -1], n_pairs)
    rng.shuffle(signs)
    times = np.sort(rng.uniform(0.0, t_max, size=2 * n_pairs))[::-1]
    return SignedTimeTuple(times=tuple(times), signs=tuple(signs))


class TestDiscreteBath:
    def test_f2_properties(self):
        b = DiscreteBath(omegas=np.array([0.5, 1.0, 2.0]),
                         couplings=np.array([0.1, 0.2, 0.05]))
        assert b.f2(0.0) == 0.0
        t = 1.3
        assert b.f2(-t) == pytest.approx(np.conj(b.f2(t)), abs=1e-15)
        # second derivative reproduces the mode correlation function
        h = 1e-5
        d2 = (b.f2(t + h) - 2 * b.f2(t) + b.f2(t - h)) / h ** 2
        c = np.sum(b.couplings ** 2 * np.exp(-1j * b.omegas * t))
        assert d2 == pytest.approx(c, rel=1e-5)

    def test_discretization_converges_to_continuum(self):
        # the omega grid is truncated at omega_max_factor * omega_c, so the
        # attainable error floor is the exp(-omega/omega_c) tail mass
        spec = BathSpec(alpha=0.3, s=2.0, omega_c=1.0)
        ts = np.linspace(0.1, 5.0, 12)
        exact = f2(spec, ts)
        coarse = discretize_bath(spec, n_modes=40, omega_max_factor=30.0)
        fine = discretize_bath(spec, n_modes=400, omega_max_factor=30.0)
        err_coarse = np.max(np.abs(np.array([coarse.f2(t) for t in ts]) - exact))
        err_fine = np.max(np.abs(np.array([fine.f2(t) for t in ts]) - exact))
        assert err_fine < 1e-10
        assert err_fine < err_coarse

    def test_polaron_shift_matches_continuum(self):
        spec = BathSpec(alpha=0.15, s=1.0, omega_c=1.0)
        disc = discretize_bath(spec, n_modes=300, omega_max_factor=30.0)
        from bosonboson.bath import polaron_shift
        assert disc.polaron_shift == pytest.approx(polaron_shift(spec), rel=1e-10)


class TestGaussianOracle:
    def test_two_point_equals_f2(self, bath16):
        # displaced-pair correlator: exponent is exactly F2(t)
        t = 1.7
        tup = SignedTimeTuple(times=(t, 0.0), signs=(1, -1))
        val = gaussian_correlator_oracle(bath16, tup)
        wick = wick_exponent_from_f2(bath16.f2, tup.times, tup.signs)
        assert val == pytest.approx(np.exp(-wick), rel=1e-12)

    def test_matches_wick_on_random_tuples(self, bath16):
        rng = np.random.default_rng(42)
        for _ in range(20):
            tup = random_balanced_tuple(rng)
            via_wick = np.exp(-wick_exponent_from_f2(
                bath16.f2, tup.times, tup.signs))
            direct = gaussian_correlator_oracle(bath16, tup)
            assert direct == pytest.approx(via_wick, abs=1e-10)

    def test_six_point(self, bath16):
        rng = np.random.default_rng(7)
        tup = random_balanced_tuple(rng, n_pairs=3)
        via_wick = np.exp(-wick_exponent_from_f2(
            bath16.f2, tup.times, tup.signs))
        assert gaussian_correlator_oracle(bath16, tup) == \
            pytest.approx(via_wick, abs=1e-10)

    def test_rejects_unbalanced(self):
        with pytest.raises(ValueError, match="balanced"):
            SignedTimeTuple(times=(1.0, 0.5), signs=(1, 1))


class TestFullPathSum:
    def test_zero_coupling_matches_lindblad(self):
        bath = BathSpec(alpha=0.0, s=1.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.3, delta_c=0.4, eta=0.5, dim=3)
        dt, steps = 0.2, 4
        times, states = full_path_sum(sys_, dt, steps)
        lv = liouvillian(3, sys_.delta_c, sys_.eta, sys_.kappa)
        rho = np.zeros((3, 3), dtype=complex)
        rho[0, 0] = 1.0
        for t, got in zip(times, states):
            exact = unvec(expm(lv * t) @ vec(rho), 3)
            assert np.max(np.abs(got - exact)) < 1e-10

    def test_traces_stay_one(self):
        bath = BathSpec(alpha=0.4, s=2.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.2, delta_c=-0.3, eta=0.6, dim=2)
        _, states = full_path_sum(sys_, 0.15, 6)
        for rho in states:
            assert abs(np.trace(rho) - 1.0) < 1e-12

    def test_memory_cutoff_changes_nothing_when_longer_than_run(self):
        bath = BathSpec(alpha=0.3, s=2.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.1, delta_c=0.2, eta=0.4, dim=2)
        _, full = full_path_sum(sys_, 0.1, 6)
        _, cut = full_path_sum(sys_, 0.1, 6, memory_steps=6)
        assert np.max(np.abs(full[-1] - cut[-1])) < 1e-14

    def test_path_space_guard(self):
        bath = BathSpec(alpha=0.1, s=1.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.1, dim=4)
        with pytest.raises(ValueError, match="path"):
            full_path_sum(sys_, 0.1, 10)


class TestSingleMode:
    def test_decoupled_mode_reproduces_driven_cavity(self):
        bath = BathSpec(alpha=0.0, s=1.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.5, delta_c=0.3, eta=0.1, dim=8)
        spec = SingleModeSpec(omega_m=1.0, g=0.0, d_mech=3)
        res = single_mode_dynamics(spec, sys_, t_final=6.0, n_out=25)
        for t, rho in zip(res.times[1:], res.states[1:]):
            _, n_exact = driven_cavity_expectations(
                sys_.delta_c, sys_.eta, sys_.kappa, t)
            n_num = float(np.real(np.trace(np.diag(np.arange(8)) @ rho)))
            assert n_num == pytest.approx(n_exact, abs=1e-8)

    def test_trace_and_hermiticity(self):
        bath = BathSpec(alpha=0.3, s=2.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.1, delta_c=0.0, eta=0.2, dim=5)
        spec = matched_single_mode(bath, d_mech=12)
        res = single_mode_dynamics(spec, sys_, t_final=4.0, n_out=9)
        for rho in res.states:
            assert abs(np.trace(rho) - 1.0) < 1e-7
            assert np.max(np.abs(rho - rho.conj().T)) < 1e-8

    def test_matched_coupling(self):
        bath = BathSpec(alpha=0.18, s=2.0, omega_c=1.4)
        spec = matched_single_mode(bath)
        assert spec.omega_m == pytest.approx(1.4)
        assert spec.g == pytest.approx(1.4 * np.sqrt(2 * 0.18))

    def test_warns_on_mechanical_truncation_leak(self):
        bath = BathSpec(alpha=0.8, s=2.0, omega_c=1.0)
        sys_ = SystemSpec(bath=bath, kappa=0.05, delta_c=0.0, eta=0.8, dim=4)
        spec = matched_single_mode(bath, d_mech=3)
        with pytest.warns(UserWarning, match="mechanical"):
            single_mode_dynamics(spec, sys_, t_final=5.0, n_out=6)

    def test_validation(self):
        with pytest.raises(ValueError):
            SingleModeSpec(omega_m=-1.0, g=0.1, d_mech=5)
        with pytest.raises(ValueError):
            SingleModeSpec(omega_m=1.0, g=0.1, d_mech=2)
