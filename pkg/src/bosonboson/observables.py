"""Cavity-state observables: photon statistics, Wigner function, snapshots."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .liouville import annihilation


@dataclass(frozen=True)
class CavityState:
    """Validated reduced density matrix of the cavity mode."""

    rho: np.ndarray
    trace_tol: float = 1e-6
    herm_tol: float = 1e-8
    psd_tol: float = 1e-6

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "rho", rho)
        if abs(np.trace(rho) - 1.0) > self.trace_tol:
            raise ValueError(f"trace {np.trace(rho):.8f} deviates from 1")
        if np.linalg.norm(rho - rho.conj().T) > self.herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -self.psd_tol:
            raise ValueError("density matrix has a significant negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass
class PhotonStatistics:
    populations: np.ndarray     # p_n
    mean: float                 # <c^dag c>
    g2: float                   # <c^dag c^dag c c> / <c^dag c>^2
    g2_defined: bool            # False when the mean is numerically zero


def photon_statistics(state: CavityState) -> PhotonStatistics:
    rho = state.rho
    n = np.arange(state.dim, dtype=float)
    populations = np.real(np.diag(rho)).copy()
    mean = float(np.dot(n, populations))
    pair = float(np.dot(n * (n - 1.0), populations))
    defined = mean > 1e-12
    g2 = pair / mean ** 2 if defined else float("nan")
    return PhotonStatistics(populations=populations, mean=mean, g2=g2,
                            g2_defined=defined)


@dataclass
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray          # (len(p), len(x)) real
    min_value: float
    normalization: float        # grid integral, should be close to 1

    def min_location(self) -> tuple:
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.x[j]), float(self.p[i])


def wigner(state: CavityState, extent: float = 4.0, points: int = 101,
           pad: int = 4) -> WignerGrid:
    """Displaced-parity Wigner function W(zeta) = (2/pi) tr[D†(zeta) rho D(zeta) Pi].

    D(zeta) is the exponential of the truncated zeta c† - zeta* c generator.
    The state is embedded in a padded Fock space before displacing; `pad` is a
    floor, and the actual padding grows with the grid extent so the displaced
    state stays inside the truncation (|zeta|^2 photons at the grid corner).
    Writing zeta = r e^{i phi}, D = R_phi exp(r(c† - c)) R_phi† with R_phi a
    number-op phase, so one eigendecomposition of i(c† - c) covers the grid.
    """
    d = state.dim
    if np.real(state.rho[d - 1, d - 1]) > 1e-4:
        warnings.warn("top Fock level holds > 1e-4 population: the state may "
                      "be truncated", UserWarning)
    r_max = np.sqrt(2.0) * extent
    dim = max(d + pad, int(np.ceil((r_max + np.sqrt(d) + 2.5) ** 2)))
    a_op = annihilation(dim)
    lam, v = np.linalg.eigh(1j * (a_op.conj().T - a_op))
    parity = (-1.0) ** np.arange(dim)

    # rank decomposition of rho; keep signed tails within the PSD tolerance
    evals, evecs = np.linalg.eigh(state.rho)
    keep = np.abs(evals) > 1e-14
    evals, evecs = evals[keep], evecs[:, keep]

    xs = np.linspace(-extent, extent, points)
    ps = np.linspace(-extent, extent, points)
    zeta = xs[None, :] + 1j * ps[:, None]
    r = np.abs(zeta).ravel()
    phi = np.angle(zeta).ravel()
    n_small = np.arange(d)
    values = np.zeros(points * points)
    v_small = v[:d, :].conj()
    for w, psi in zip(evals, evecs.T):
        # |(D† psi)_n|^2 is insensitive to the final R_phi phase layer
        rotated = psi[None, :] * np.exp(-1j * np.outer(phi, n_small))
        modes = (rotated @ v_small) * np.exp(1j * np.outer(r, lam))
        values += w * (np.abs(modes @ v.T) ** 2 @ parity)
    values = (2.0 / np.pi) * values.reshape(points, points)

    step = xs[1] - xs[0]
    norm = float(values.sum() * step * step)
    if abs(norm - 1.0) > 0.02:
        warnings.warn(f"Wigner grid integral {norm:.4f}: grid too coarse or "
                      "narrow for this state", UserWarning)
    return WignerGrid(x=xs, p=ps, values=values,
                      min_value=float(values.min()), normalization=norm)


def find_t_star(times: np.ndarray, states) -> tuple:
    """Earliest time maximizing the single-photon probability p_1."""
    times = np.asarray(times, dtype=float)
    p1 = np.array([np.real(rho[1, 1]) for rho in states])
    idx = int(np.argmax(p1))
    return float(times[idx]), idx


@dataclass
class SteadyStateFit:
    value: float                # extrapolated t -> infinity level
    frequency: float            # best transient oscillation frequency
    residual: float             # rms misfit of the winning model


def steady_state_occupation(times, values, decay_rate, freq_window,
                            intensity_rate=None) -> SteadyStateFit:
    """Extrapolate a relaxation tail to its steady-state level.

    Fits values(t) = v + e^{-r t} (a cos nu t + b sin nu t) + c e^{-2 r t}
    with the amplitude decay rate r = decay_rate held fixed and nu scanned
    over freq_window; each frequency is a linear least-squares problem and
    the best residual wins. This is the shape of a driven cavity's approach
    to the steady state: the oscillation is the drive-transient
    interference beat, the monotone terms the transient intensity. When the
    photon loss rate differs from 2 r (dephasing adds to the amplitude
    decay but not to the intensity relaxation), pass it as intensity_rate
    to add the matching relaxation column.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 8:
        raise ValueError("need at least 8 samples to fit the tail")
    env = np.exp(-decay_rate * (times - times[0]))
    extra = []
    if intensity_rate is not None:
        extra.append(np.exp(-intensity_rate * (times - times[0])))

    def solve(nu):
        cols = np.column_stack([np.ones_like(times), env * np.cos(nu * times),
                                env * np.sin(nu * times), env ** 2] + extra)
        coef, *_ = np.linalg.lstsq(cols, values, rcond=None)
        return coef, float(np.sqrt(np.mean((cols @ coef - values) ** 2)))

    lo, hi = freq_window
    coarse = np.linspace(lo, hi, 241)
    best_nu = min(coarse, key=lambda nu: solve(nu)[1])
    span = (hi - lo) / 240.0
    fine = np.linspace(best_nu - span, best_nu + span, 41)
    best_nu = min(fine, key=lambda nu: solve(nu)[1])
    coef, resid = solve(best_nu)
    return SteadyStateFit(value=float(coef[0]), frequency=float(best_nu),
                          residual=resid)
