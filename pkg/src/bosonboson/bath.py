"""Bath spectral density and the polaron correlation kernels built from it.

The environment is a continuum of harmonic modes with spectral density

    J(w) = 2 alpha w^s omega_c^(1-s) exp(-w/omega_c),    s >= 1,

coupled to the cavity photon number. Everything downstream needs only three
derived objects: the polaron shift Delta_p = integral J/w, the two-point
exponent F2(t) of the bath displacement correlator, and discretized
double-integrals of the autocorrelation C(t) = F2''(t) (the influence-
functional coefficients).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class BathSpec:
    """Spectral-density parameters. beta=None means zero temperature."""

    alpha: float
    s: float = 1.0
    omega_c: float = 1.0
    beta: float | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("coupling alpha must be >= 0")
        if self.omega_c <= 0:
            raise ValueError("cutoff omega_c must be > 0")
        if self.s < 1:
            raise ValueError("sub-Ohmic exponents s < 1 are not supported")
        if self.beta is not None and self.beta <= 0:
            raise ValueError("inverse temperature beta must be > 0 (or None for T=0)")


@dataclass(frozen=True)
class SignedTimeTuple:
    """Vertex times t_i with charges sigma_i = +-1, balanced to sum zero."""

    times: tuple[float, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if len(self.times) != len(self.signs):
            raise ValueError("times and signs must have equal length")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if sum(self.signs) != 0:
            raise ValueError("signs must sum to zero (balanced vertex charges)")


def spectral_density(spec: BathSpec, omega):
    """J(omega) = 2 alpha omega^s omega_c^(1-s) exp(-omega/omega_c)."""
    scalar = np.ndim(omega) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    out = 2.0 * spec.alpha * w ** spec.s * spec.omega_c ** (1.0 - spec.s) * np.exp(-w / spec.omega_c)
    out = out.reshape(np.shape(omega))
    return float(out) if scalar else out


def polaron_shift(spec: BathSpec) -> float:
    """Delta_p = integral dw J(w)/w = 2 alpha omega_c Gamma(s)."""
    return 2.0 * spec.alpha * spec.omega_c * math.gamma(spec.s)


def _f2_zero_temperature(spec: BathSpec, u: np.ndarray) -> np.ndarray:
    # u = omega_c * t, dimensionless
    z = 1.0 + 1j * u
    if spec.s == 1.0:
        return 2.0 * spec.alpha * np.log(z)
    return 2.0 * spec.alpha * math.gamma(spec.s - 1.0) * (1.0 - z ** (1.0 - spec.s))


def _f2_finite_beta_scalar(spec: BathSpec, t: float) -> complex:
    # coth-kernel integral; integrable ~ t^2/beta * w^(s-1) at w -> 0.
    a, s, wc, beta = spec.alpha, spec.s, spec.omega_c, spec.beta
    w_hi = 40.0 * wc
    eps = 1e-6 * wc

    def kernel(w):
        jw = 2.0 * a * w ** s * wc ** (1.0 - s) * math.exp(-w / wc)
        x = 0.5 * beta * w
        coth = 1.0 if x > 20.0 else 1.0 / math.tanh(x)
        return jw / w ** 2 * (coth * (1.0 - math.cos(w * t)) + 1j * math.sin(w * t))

    # series for the [0, eps] sliver: coth ~ 2/(beta w) + beta w/6, small-w kernel
    # ~ 2 alpha wc^(1-s) w^(s-2) [ (2/(beta w)) w^2 t^2/2 + i w t ]
    head = 2.0 * a * wc ** (1.0 - s) * (
        (t * t / beta) * eps ** s / s + 1j * t * eps ** s / s
    )
    re = quad(lambda w: kernel(w).real, eps, w_hi, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    im = quad(lambda w: kernel(w).imag, eps, w_hi, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    return head + re + 1j * im


def f2(spec: BathSpec, t):
    """Two-point polaron exponent F2(t); <e^{-phi(t)} e^{phi(0)}> = e^{-F2(t)}.

    F2(t) = integral dw J(w)/w^2 [coth(beta w/2)(1-cos wt) + i sin wt].
    Closed form at T=0, quadrature for finite beta. F2(0)=0 and
    F2(-t) = conj(F2(t)).
    """
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if spec.beta is None:
        out = _f2_zero_temperature(spec, spec.omega_c * tt)
    else:
        out = np.vectorize(lambda x: _f2_finite_beta_scalar(spec, x), otypes=[complex])(tt)
    out = out.reshape(np.shape(t))
    return complex(out) if scalar else out


def bath_correlation(spec: BathSpec, t):
    """Autocorrelation C(t) = integral dw J(w) e^{-i w t} = F2''(t) at T=0."""
    is_scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if spec.beta is None:
        z = 1.0 + 1j * spec.omega_c * tt
        out = 2.0 * spec.alpha * spec.omega_c ** 2 * math.gamma(spec.s + 1.0) * z ** (-spec.s - 1.0)
        out = out.reshape(np.shape(t))
        return complex(out) if is_scalar else out

    def scalar(x):
        def kernel(w):
            jw = spectral_density(spec, w)
            xx = 0.5 * spec.beta * w
            coth = 1.0 if xx > 20.0 else 1.0 / math.tanh(xx)
            return jw * (coth * math.cos(w * x) - 1j * math.sin(w * x))

        hi = 40.0 * spec.omega_c
        re = quad(lambda w: kernel(w).real, 0.0, hi, limit=400)[0]
        im = quad(lambda w: kernel(w).imag, 0.0, hi, limit=400)[0]
        return re + 1j * im

    out = np.vectorize(scalar, otypes=[complex])(tt).reshape(np.shape(t))
    return complex(out) if is_scalar else out


def twice_integrated_kernel(spec: BathSpec, t):
    """G(t) = F2(t) - i Delta_p t, the double time-integral of C(t).

    G''(t) = C(t) with G(0) = G'(0) = 0; F2 alone has F2'(0) = i Delta_p.
    """
    out = f2(spec, t) - 1j * polaron_shift(spec) * np.asarray(t, dtype=float)
    return complex(out) if np.ndim(t) == 0 else out


def wick_exponent_from_f2(f2_of_dt: Callable[[float], complex],
                          times: Sequence[float], signs: Sequence[int]) -> complex:
    """F_2n = -sum_{i<j} sigma_i sigma_j F2(t_i - t_j), i earlier in operator order."""
    acc = 0.0 + 0.0j
    n = len(times)
    for i in range(n):
        for j in range(i + 1, n):
            acc -= signs[i] * signs[j] * f2_of_dt(times[i] - times[j])
    return acc


def wick_exponent(spec: BathSpec, tup: SignedTimeTuple) -> complex:
    """Exponent F_2n of a 2n-point displacement correlator exp(-F_2n).

    Balanced charges make the equal-time self-terms cancel, leaving only
    pairwise F2 differences.
    """
    return wick_exponent_from_f2(lambda dt_: f2(spec, dt_), tup.times, tup.signs)


def memory_kernel_coefficients(spec: BathSpec, dt: float, K: int) -> np.ndarray:
    """Influence coefficients M_0..M_K on a uniform grid of step dt.

    M_dk is the exact double integral of C(t'-t'') over a pair of time cells
    at lag dk, written through the twice-integrated kernel G:

        M_0  = G(dt)
        M_dk = G((dk+1) dt) - 2 G(dk dt) + G((dk-1) dt),  dk >= 1,

    where the linear-in-t part of G drops out of the second differences, so
    the lag coefficients are plain second differences of F2. The diagonal
    cell keeps the -i Delta_p dt piece; folding it into M_0 instead of the
    system Hamiltonian is what produces the polaron shift and the
    photon-photon attraction in propagated dynamics.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if K < 1:
        raise ValueError("memory length K must be >= 1")
    grid = f2(spec, dt * np.arange(K + 2, dtype=float))
    m = np.empty(K + 1, dtype=complex)
    m[0] = grid[1] - 1j * polaron_shift(spec) * dt
    m[1:] = grid[2:K + 2] - 2.0 * grid[1:K + 1] + grid[0:K]
    return m
