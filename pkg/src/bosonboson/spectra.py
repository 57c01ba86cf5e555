"""Weak-driving perturbation theory: excitation spectra and g2(0).

All observables here are eta -> 0 limits; eta enters only through the
normalization n0 = (eta/kappa)^2 used when comparing against finite-drive
simulations.

The normalized spectrum is the damped Fourier transform of the polaron
correlator,

    S(Delta_c) = (kappa/2) Re int_0^inf e^{(i Delta - kappa/2) tau}
                 e^{-F2(tau)} d tau,       Delta = Delta_c + Delta_p,

with an incomplete-gamma closed form for s=1 and a convergent series over
1/(1+i w_c tau)^n for s=2. The two-photon correlation comes from the
steady-state two-excitation amplitude: a triple integral over the three
time gaps of the ordered absorption paths, each path weighted by a
four-point polaron correlator that Wick-factorizes into F2 differences.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace, field

import numpy as np
from scipy.optimize import minimize_scalar

from .bath import BathSpec, f2, polaron_shift
from .incgamma import IncGammaError, upper_gamma
from .quadrature import PanelGrid, exp_weights, make_panel_grid, refined


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WeakDriveProblem:
    """Cavity/drive parameters bound to a bath for perturbative observables."""

    bath: BathSpec
    kappa: float
    delta_c: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("cavity decay kappa must be > 0")
        if self.eta < 0:
            raise ValueError("drive strength eta must be >= 0")

    @property
    def delta(self) -> float:
        """Polaron-shifted detuning Delta = Delta_c + Delta_p."""
        return self.delta_c + polaron_shift(self.bath)

    @property
    def n0(self) -> float:
        """Peak occupation scale (eta/kappa)^2 of the resonantly driven empty cavity."""
        return (self.eta / self.kappa) ** 2

    def empty_cavity_occupation(self) -> float:
        """Steady-state <c^dag c> of the empty (alpha=0) cavity at this detuning."""
        return self.eta ** 2 / (4.0 * self.delta_c ** 2 + self.kappa ** 2)


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel layout for the oscillatory time integrals (units of 1/omega_c
    for widths, 1/kappa for the outer truncation)."""

    t_max_over_decay: float = 40.0
    h0: float = 0.25
    growth: float = 1.6
    nodes_per_panel: int = 16
    g2_h0: float = 0.3
    g2_growth: float = 1.65
    g2_nodes_per_panel: int = 16
    g2_chunk: int = 16


DEFAULT_QUAD = QuadratureConfig()


@dataclass
class SpectrumResult:
    delta_c: np.ndarray
    values: np.ndarray
    method: str
    error_estimate: float | None = None
    warnings: list[str] = field(default_factory=list)


def _spectrum_grid(problem: WeakDriveProblem, quad: QuadratureConfig) -> PanelGrid:
    wc = problem.bath.omega_c
    t_max = quad.t_max_over_decay / (0.5 * problem.kappa)
    return make_panel_grid(t_max, h0=quad.h0 / wc, growth=quad.growth,
                           n=quad.nodes_per_panel)


def _spectrum_from_grid(problem: WeakDriveProblem, grid: PanelGrid,
                        fvals: np.ndarray, delta_c: float) -> float:
    z = 1j * (delta_c + polaron_shift(problem.bath)) - 0.5 * problem.kappa
    return 0.5 * problem.kappa * float(np.real(np.dot(exp_weights(grid, z), fvals)))


def spectrum_numeric(problem: WeakDriveProblem, quad: QuadratureConfig = DEFAULT_QUAD,
                     with_estimate: bool = False):
    """Normalized excitation spectrum by oscillatory panel quadrature."""
    grid = _spectrum_grid(problem, quad)
    fvals = np.exp(-f2(problem.bath, grid.nodes))
    val = _spectrum_from_grid(problem, grid, fvals, problem.delta_c)
    if not with_estimate:
        return val
    fine = refined(grid)
    val2 = _spectrum_from_grid(problem, fine, np.exp(-f2(problem.bath, fine.nodes)),
                               problem.delta_c)
    return val2, abs(val2 - val)


def weak_drive_occupation(problem: WeakDriveProblem, times,
                          quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Normalized occupation <c^dag c>(t)/n0 after the drive switches on.

    Same order in eta as the spectrum: the polaron correlator carries the
    excitation between the two drive insertions, and the population decays
    bare afterwards (equal photon number on both branches leaves no net
    bath dressing). Collapsing the time ordering gives

        n(t)/n0 = (kappa/2) Re[ H_z(t) - e^{-kappa t} H_{z+kappa}(t) ],
        H_w(t) = int_0^t e^{w tau} e^{-F2(tau)} d tau,

    which approaches spectrum_numeric as t -> infinity. Useful as the
    analytic tail correction when reading a steady state off a finite
    simulation: n_ss ~ n_sim(t) + n0 [S - n(t)/n0] for t past the
    transient's first few beats.
    """
    wc = problem.bath.omega_c
    kappa = problem.kappa
    z = 1j * problem.delta - 0.5 * kappa
    out = np.empty(len(np.atleast_1d(times)), dtype=float)
    for i, t in enumerate(np.atleast_1d(times)):
        if t <= 0.0:
            out[i] = 0.0
            continue
        grid = make_panel_grid(float(t), h0=quad.h0 / wc, growth=quad.growth,
                               n=quad.nodes_per_panel)
        fvals = np.exp(-f2(problem.bath, grid.nodes))
        h_z = np.dot(exp_weights(grid, z), fvals)
        h_zk = np.dot(exp_weights(grid, z + kappa), fvals)
        out[i] = 0.5 * kappa * float(np.real(h_z - np.exp(-kappa * t) * h_zk))
    return out


def spectrum_ohmic_analytic(problem: WeakDriveProblem,
                            quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Closed form for s=1 via the upper incomplete gamma function.

    S = (kappa/2) Re[(i w_c)^{-2a} (kappa/2 - i Delta)^{2a-1} e^{-(Delta + i kappa/2)/w_c}
        Gamma(1-2a, -(Delta + i kappa/2)/w_c)],  a = alpha.
    """
    if problem.bath.s != 1:
        raise ValueError("ohmic closed form requires s = 1")
    al = problem.bath.alpha
    wc = problem.bath.omega_c
    delta = problem.delta
    mu = 0.5 * problem.kappa - 1j * delta
    w = -(delta + 0.5j * problem.kappa) / wc
    try:
        g = upper_gamma(1.0 - 2.0 * al, w)
    except IncGammaError as exc:
        warnings.warn(f"incomplete gamma failed ({exc}); falling back to quadrature",
                      QuadratureWarning)
        return spectrum_numeric(problem, quad)
    pref = np.exp(-2.0 * al * (np.log(wc) + 0.5j * np.pi)) * mu ** (2.0 * al - 1.0)
    return 0.5 * problem.kappa * float(np.real(pref * np.exp(w) * g))


def spectrum_superohmic_series(problem: WeakDriveProblem, n_max: int = 400) -> float:
    """Series form for s=2: S = e^{-2a} sum_n (2a)^n/n! (kappa/2) Re I_n with
    I_n = int_0^inf (1 + i w_c t)^{-n} e^{-mu t} dt.

    I_0 = 1/mu; I_1 = e^w Gamma(0, w) / (i w_c), w = -(Delta + i kappa/2)/w_c;
    integrating d/dt[(1+i w_c t)^{-n} e^{-mu t}] gives the forward recurrence
    I_{n+1} = (1 - mu I_n) / (i n w_c), stable because the homogeneous error
    contracts once n exceeds |mu|/w_c.
    """
    if problem.bath.s != 2:
        raise ValueError("series form requires s = 2")
    al = problem.bath.alpha
    wc = problem.bath.omega_c
    delta = problem.delta
    mu = 0.5 * problem.kappa - 1j * delta
    coef = math.exp(-2.0 * al)
    total = coef / mu
    if al > 0:
        w = -(delta + 0.5j * problem.kappa) / wc
        i_n = np.exp(w) * upper_gamma(0.0, w) / (1j * wc)
        n = 1
        coef *= 2.0 * al
        total += coef * i_n
        while n < n_max:
            i_n = (1.0 - mu * i_n) / (1j * n * wc)
            n += 1
            coef *= 2.0 * al / n
            total += coef * i_n
            if coef < 1e-14:
                break
    return 0.5 * problem.kappa * float(np.real(total))


def spectrum_scan(problem: WeakDriveProblem, delta_c_grid, method: str = "auto",
                  quad: QuadratureConfig = DEFAULT_QUAD,
                  with_estimate: bool = False) -> SpectrumResult:
    """Evaluate the spectrum on a detuning grid, reusing bath kernels."""
    grid_vals = np.asarray(delta_c_grid, dtype=float)
    if method == "auto":
        method = {1.0: "ohmic-analytic", 2.0: "superohmic-series"}.get(
            float(problem.bath.s), "numeric")
    caught: list[str] = []
    est = None
    if method == "numeric":
        pg = _spectrum_grid(problem, quad)
        fvals = np.exp(-f2(problem.bath, pg.nodes))
        values = np.array([_spectrum_from_grid(problem, pg, fvals, dc)
                           for dc in grid_vals])
        if with_estimate:
            fine = refined(pg)
            ffine = np.exp(-f2(problem.bath, fine.nodes))
            worst = 0.0
            for dc in grid_vals:
                v1 = _spectrum_from_grid(problem, pg, fvals, dc)
                v2 = _spectrum_from_grid(problem, fine, ffine, dc)
                worst = max(worst, abs(v1 - v2))
            est = worst
    elif method == "ohmic-analytic":
        values = np.empty_like(grid_vals)
        with warnings.catch_warnings(record=True) as wlist:
            warnings.simplefilter("always", QuadratureWarning)
            for i, dc in enumerate(grid_vals):
                values[i] = spectrum_ohmic_analytic(replace(problem, delta_c=dc), quad)
            caught = [str(w.message) for w in wlist]
    elif method == "superohmic-series":
        values = np.array([spectrum_superohmic_series(replace(problem, delta_c=dc))
                           for dc in grid_vals])
    else:
        raise ValueError(f"unknown spectrum method {method!r}")
    return SpectrumResult(delta_c=grid_vals, values=values, method=method,
                          error_estimate=est, warnings=caught)


def resonance(problem: WeakDriveProblem, mode: str = "closed") -> float:
    """Detuning of the quasi-photon peak.

    Closed forms: s=2 -> -Delta_p; s=1, alpha < 1/2 ->
    -Delta_p + (kappa/2) tan(pi alpha / (2 (1 - alpha))).
    mode="numeric" maximizes spectrum_numeric directly.
    """
    dp = polaron_shift(problem.bath)
    if mode == "closed":
        s = problem.bath.s
        if s == 2:
            return -dp
        if s == 1:
            al = problem.bath.alpha
            if al >= 0.5:
                raise ValueError("no quasi-photon peak for Ohmic alpha >= 1/2")
            return -dp + 0.5 * problem.kappa * math.tan(
                math.pi * al / (2.0 * (1.0 - al)))
        raise ValueError("closed-form resonance needs s in {1, 2}")
    if mode != "numeric":
        raise ValueError(f"unknown resonance mode {mode!r}")
    try:
        center = resonance(problem, mode="closed")
    except ValueError:
        center = -dp
    span = max(5.0 * problem.kappa, 0.25 * problem.bath.omega_c)
    pg = _spectrum_grid(problem, DEFAULT_QUAD)
    fvals = np.exp(-f2(problem.bath, pg.nodes))
    res = minimize_scalar(
        lambda dc: -_spectrum_from_grid(problem, pg, fvals, dc),
        bounds=(center - span, center + span), method="bounded",
        options={"xatol": 1e-7 * max(problem.kappa, 1e-12)})
    return float(res.x)


def g2_decorrelated(problem: WeakDriveProblem, method: str = "auto") -> float:
    """Spectral estimate g2 ~ S_{alpha,2kappa}(Delta_c + 2 Delta_p) / S_{alpha,kappa}(Delta_c).

    The second absorption sees the once-shifted resonance and a doubled
    decay rate; valid near Delta_c = resonance for kappa << omega_c.
    """
    dp = polaron_shift(problem.bath)
    num_problem = replace(problem, kappa=2.0 * problem.kappa,
                          delta_c=problem.delta_c + 2.0 * dp)

    def s_of(p: WeakDriveProblem) -> float:
        m = method
        if m == "auto":
            m = {1.0: "ohmic-analytic", 2.0: "superohmic-series"}.get(
                float(p.bath.s), "numeric")
        if m == "ohmic-analytic":
            return spectrum_ohmic_analytic(p)
        if m == "superohmic-series":
            return spectrum_superohmic_series(p)
        return spectrum_numeric(p)

    return s_of(num_problem) / s_of(problem)


def _g2_axis(problem: WeakDriveProblem, quad: QuadratureConfig, damping: float) -> PanelGrid:
    wc = problem.bath.omega_c
    t_max = quad.t_max_over_decay / damping
    return make_panel_grid(t_max, h0=quad.g2_h0 / wc, growth=quad.g2_growth,
                           n=quad.g2_nodes_per_panel)


def _g2_paths(problem: WeakDriveProblem):
    """Free-evolution exponents (z1, z2, z3) for the three ordered
    two-excitation paths in gap coordinates g1 = t2-t1, g2 = t3-t2,
    g3 = t4-t3; the matching Wick combinations live in _g2_value."""
    delta = problem.delta
    dp = polaron_shift(problem.bath)
    k = problem.kappa
    z1 = -1j * delta - 0.5 * k
    z2_plain = -k
    z2_two = -2j * (delta + dp) - k
    z3_minus = -1j * (delta + 2.0 * dp) - 1.5 * k
    z3_plus = +1j * (delta + 2.0 * dp) - 1.5 * k
    return (
        ("I", (z1, z2_plain, z3_minus)),
        ("II", (z1, z2_plain, z3_plus)),
        ("III", (z1, z2_two, z3_minus)),
    )


def g2_full(problem: WeakDriveProblem, quad: QuadratureConfig = DEFAULT_QUAD,
            with_estimate: bool = False):
    """g2(0) from the steady-state two-photon amplitude (eta -> 0 limit).

    g2 = (kappa^3 / 4) Re[T_I + T_II + T_III] / S(Delta_c)^2 with each T a
    triple gap integral of exp(four-point Wick exponent) times the free
    exponentials; alpha = 0 gives exactly 1.
    """
    val = _g2_value(problem, quad)
    if not with_estimate:
        return val
    finer = replace(quad, g2_h0=quad.g2_h0 * 0.6,
                    g2_growth=1.0 + (quad.g2_growth - 1.0) * 0.75)
    val2 = _g2_value(problem, finer)
    return val2, abs(val2 - val)


def _g2_value(problem: WeakDriveProblem, quad: QuadratureConfig) -> float:
    spec = problem.bath
    k = problem.kappa
    grids = (_g2_axis(problem, quad, 0.5 * k),
             _g2_axis(problem, quad, k),
             _g2_axis(problem, quad, 1.5 * k))
    g1, g2n, g3 = (g.nodes for g in grids)

    # pairwise/triple F2 sums shared by all three paths
    ff1 = f2(spec, g1)
    ff2 = f2(spec, g2n)
    ff3 = f2(spec, g3)
    a12 = f2(spec, g1[:, None] + g2n[None, :])
    a23 = f2(spec, g2n[:, None] + g3[None, :])

    paths = _g2_paths(problem)
    weights = {name: tuple(exp_weights(g, z) for g, z in zip(grids, zs))
               for name, zs in paths}

    c3 = np.conj(ff3)[None, None, :]
    f3b = ff3[None, None, :]
    f2b = ff2[None, :, None]
    c2 = np.conj(ff2)[None, :, None]
    f23 = a23[None, :, :]
    c23 = np.conj(a23)[None, :, :]

    total = {name: 0.0 + 0.0j for name, _ in paths}
    chunk = max(1, quad.g2_chunk)
    for i0 in range(0, len(g1), chunk):
        i1 = min(i0 + chunk, len(g1))
        a123 = f2(spec, g1[i0:i1, None, None] + g2n[None, :, None] + g3[None, None, :])
        c123 = np.conj(a123)
        c12 = np.conj(a12[i0:i1])[:, :, None]
        c1 = np.conj(ff1[i0:i1])[:, None, None]
        w_combo = {
            "I": c12 - c123 - c1 - c3 - f2b + f23,
            "II": c123 - c12 - c1 - f3b - f23 + f2b,
            "III": c1 - c123 - c12 - c23 - c2 + f3b,
        }
        for name, _ in paths:
            w1, w2, w3 = weights[name]
            block = np.exp(w_combo[name])
            total[name] += np.dot(w1[i0:i1], (block @ w3) @ w2)

    s_val = spectrum_numeric(problem, quad)
    t_sum = sum(total.values())
    return float(0.25 * k ** 3 * np.real(t_sum) / s_val ** 2)
