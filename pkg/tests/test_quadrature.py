import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from bosonboson.quadrature import exp_weights, integrate_exp, make_panel_grid, refined


class TestPureExponential:
    @given(kappa=st.floats(0.01, 2.0), delta=st.floats(-30.0, 30.0))
    @settings(max_examples=60, deadline=None)
    def test_constant_integrand_exact(self, kappa, delta):
        # int_0^T e^{zt} dt = (e^{zT} - 1)/z, captured exactly by construction
        z = 1j * delta - 0.5 * kappa
        t_max = 80.0 / kappa
        val = integrate_exp(lambda t: np.ones_like(t, dtype=complex), z, t_max)
        want = (np.exp(z * t_max) - 1.0) / z
        assert val == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_polynomial_times_exponential_exact(self):
        z = -0.3 + 4.0j
        grid = make_panel_grid(50.0, h0=0.5, growth=1.5)
        w = exp_weights(grid, z)
        for p in (1, 3, 7):
            val = np.dot(w, grid.nodes**p)
            want = quad(lambda t: (t**p * np.exp(z * t)).real, 0, 50, limit=500)[0] \
                + 1j * quad(lambda t: (t**p * np.exp(z * t)).imag, 0, 50, limit=500)[0]
            assert val == pytest.approx(want, rel=1e-9)


class TestSmoothIntegrands:
    @pytest.mark.parametrize("delta", [0.0, 0.4, 3.0, 15.0])
    def test_lorentzian_kernel(self, delta):
        # f = (1+it)^(-0.5), strongly oscillatory exponent: compare to quad
        z = 1j * delta - 0.05
        f = lambda t: (1 + 1j * t) ** -0.5
        val = integrate_exp(f, z, t_max=1600.0, h0=0.25)

        def real_part(t):
            return (f(t) * np.exp(z * t)).real

        def imag_part(t):
            return (f(t) * np.exp(z * t)).imag

        want = quad(real_part, 0, 1600, limit=4000)[0] + 1j * quad(imag_part, 0, 1600, limit=4000)[0]
        assert val == pytest.approx(want, rel=2e-8, abs=1e-10)

    def test_estimate_is_honest(self):
        z = 1j * 2.0 - 0.1
        f = lambda t: np.exp(-0.4 * np.log1p(1j * t))
        val, est = integrate_exp(f, z, t_max=800.0, with_estimate=True)
        tight = integrate_exp(f, z, t_max=800.0, h0=0.05, growth=1.3)
        assert abs(val - tight) <= 50 * max(est, 1e-14)


class TestGridMechanics:
    def test_refined_doubles_panels(self):
        g = make_panel_grid(10.0, h0=0.5)
        r = refined(g)
        assert r.n_panels == 2 * g.n_panels
        assert np.isclose(r.edges[-1], 10.0) and r.edges[0] == 0.0

    def test_edges_cover_domain(self):
        g = make_panel_grid(123.4, h0=0.3, growth=1.7)
        assert g.edges[0] == 0.0
        assert g.edges[-1] == pytest.approx(123.4)
        assert np.all(np.diff(g.edges) > 0)
        assert len(g.nodes) == g.n_panels * g.n_per_panel

    def test_validation(self):
        with pytest.raises(ValueError):
            make_panel_grid(-1.0)
        with pytest.raises(ValueError):
            make_panel_grid(1.0, growth=0.9)
