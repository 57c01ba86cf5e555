"""Small-instance exact references.

Three independent ground truths for the tensor-network engine and the bath
kernels: an uncompressed path sum over all Liouville index histories, dense
master-equation integration of a cavity coupled to one explicit bath mode,
and closed-form Gaussian correlators of a finite discretized bath.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bath import BathSpec, SignedTimeTuple, spectral_density
from .liouville import annihilation, number_op, vec
from .tempo import SystemSpec, build_free_propagator, build_influence_tensors

_PATH_SPACE_LIMIT = 10 ** 8


@dataclass(frozen=True)
class DiscreteBath:
    """Finite mode set (omega_k, c_k) standing in for a continuum J(omega)."""

    omegas: np.ndarray
    couplings: np.ndarray

    def f2(self, t):
        """Twice-integrated autocorrelation of the discrete bath at T=0."""
        lam2 = (self.couplings / self.omegas) ** 2
        t = np.asarray(t, dtype=float)
        phase = np.multiply.outer(t, self.omegas)
        out = ((1.0 - np.cos(phase)) + 1j * np.sin(phase)) @ lam2
        return complex(out) if out.ndim == 0 else out

    @property
    def polaron_shift(self) -> float:
        return float(np.sum(self.couplings ** 2 / self.omegas))


def discretize_bath(spec: BathSpec, n_modes: int = 200,
                    omega_max_factor: float = 10.0) -> DiscreteBath:
    """Gauss-Legendre sampling of J on [0, omega_max], c_k^2 = J(w_k) weight_k."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    nodes, weights = np.polynomial.legendre.leggauss(n_modes)
    half = 0.5 * omega_max_factor * spec.omega_c
    omegas = half * (nodes + 1.0)
    couplings = np.sqrt(spectral_density(spec, omegas) * weights * half)
    return DiscreteBath(omegas=omegas, couplings=couplings)


def gaussian_correlator_oracle(modes: DiscreteBath,
                               tup: SignedTimeTuple) -> complex:
    """<prod_j exp(i sigma_j P(t_j))> in the bath vacuum, evaluated exactly.

    Each factor is a displacement D(alpha_j) per mode with
    alpha_j = i sigma_j (c/omega) e^{i omega t_j}; merging the product with
    D(a)D(b) = e^{(a conj(b) - conj(a) b)/2} D(a+b) and <D(beta)> =
    e^{-|beta|^2/2} gives a closed form.
    """
    times = np.asarray(tup.times, dtype=float)
    signs = np.asarray(tup.signs, dtype=float)
    lam = modes.couplings / modes.omegas
    alpha = 1j * signs[None, :] * lam[:, None] \
        * np.exp(1j * np.outer(modes.omegas, times))
    log_val = -0.5 * np.sum(np.abs(alpha.sum(axis=1)) ** 2)
    pair = np.einsum("ki,kj->ij", alpha, alpha.conj())
    upper = np.triu(np.ones((len(times), len(times)), dtype=bool), k=1)
    log_val = log_val + 1j * np.sum(pair[upper].imag)
    return complex(np.exp(log_val))


def full_path_sum(system: SystemSpec, dt: float, n_steps: int,
                  memory_steps: int | None = None, rho0=None):
    """Exact discretized path integral by brute-force enumeration.

    Same propagator and influence coefficients as the tensor-network engine,
    with the amplitude over all (d^2)^k index histories kept dense; ground
    truth for small d and step counts. Returns (times, states).
    """
    d = system.dim
    d2 = d * d
    if memory_steps is None:
        memory_steps = n_steps
    if d2 ** n_steps > _PATH_SPACE_LIMIT:
        raise ValueError(
            f"path space (d^2)^steps = {d2 ** n_steps:.2e} exceeds "
            f"{_PATH_SPACE_LIMIT:.0e}")
    half = build_free_propagator(system, dt)
    p_full = half @ half
    infl = build_influence_tensors(system, dt, max(memory_steps, 1))

    if rho0 is None:
        rho0 = np.zeros((d, d), dtype=complex)
        rho0[0, 0] = 1.0
    amp = infl.i0 * (half @ vec(np.asarray(rho0, dtype=complex)))
    states = [(half @ amp).reshape(d, d)]
    for k in range(1, n_steps):
        # grow axis k for the new index; axes 0..k-1 hold j_1..j_k
        new = amp[..., None] * p_full.T.reshape((1,) * (k - 1) + (d2, d2))
        new = new * infl.i0.reshape((1,) * k + (d2,))
        for dk in range(1, min(k, memory_steps) + 1):
            w = infl.dense(dk).T     # [j_earlier, j_new]
            shape = (1,) * (k - dk) + (d2,) + (1,) * (dk - 1) + (d2,)
            new = new * w.reshape(shape)
        amp = new
        marginal = amp.reshape(-1, d2).sum(axis=0)
        states.append((half @ marginal).reshape(d, d))
    times = dt * np.arange(1, n_steps + 1)
    return times, np.array(states)


@dataclass(frozen=True)
class SingleModeSpec:
    """One explicit bath oscillator: H_int = g c^dag c (b + b^dag)."""

    omega_m: float
    g: float
    d_mech: int = 20

    def __post_init__(self):
        if self.omega_m <= 0:
            raise ValueError("mechanical frequency must be > 0")
        if self.d_mech < 3:
            raise ValueError("mechanical truncation must be >= 3")


def matched_single_mode(bath: BathSpec, d_mech: int = 20) -> SingleModeSpec:
    """Single mode at omega_c whose coupling matches the continuum
    nonlinearity: g^2 / omega_c^2 = 2 alpha."""
    g = bath.omega_c * np.sqrt(2.0 * bath.alpha)
    return SingleModeSpec(omega_m=bath.omega_c, g=g, d_mech=d_mech)


@dataclass
class SingleModeResult:
    times: np.ndarray
    states: np.ndarray          # (n, d, d) reduced cavity matrices
    mech_tail: float            # worst top-two-level mechanical population


def single_mode_dynamics(spec: SingleModeSpec, system: SystemSpec,
                         t_final: float, n_out: int = 200,
                         rho0=None) -> SingleModeResult:
    """Dense adaptive integration of the cavity x single-mode master equation,
    traced down to the cavity. Joint dimension must stay dense-friendly."""
    dc, dm = system.dim, spec.d_mech
    dim = dc * dm
    if dim > 400:
        raise ValueError("joint dimension too large for dense integration")

    c = np.kron(annihilation(dc), np.eye(dm))
    b = np.kron(np.eye(dc), annihilation(dm))
    n_c = np.kron(number_op(dc), np.eye(dm))
    h = (-system.delta_c * n_c
         + 0.5 * system.eta * (c + c.conj().T)
         + spec.g * n_c @ (b + b.conj().T)
         + spec.omega_m * np.kron(np.eye(dc), number_op(dm)))
    cd = c.conj().T
    cdc = cd @ c
    kappa = system.kappa

    def rhs(_, y):
        rho = y.view(complex).reshape(dim, dim)
        drho = -1j * (h @ rho - rho @ h)
        drho += 0.5 * kappa * (2.0 * c @ rho @ cd - cdc @ rho - rho @ cdc)
        return drho.ravel().view(float)

    if rho0 is None:
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[0, 0] = 1.0
    t_eval = np.linspace(0.0, t_final, n_out + 1)[1:]
    sol = solve_ivp(rhs, (0.0, t_final), rho0.ravel().view(float),
                    method="DOP853", t_eval=t_eval, rtol=1e-9, atol=1e-11)
    if not sol.success:
        raise RuntimeError(f"dense integration failed: {sol.message}")

    full = sol.y.T.copy().view(complex).reshape(-1, dc, dm, dc, dm)
    states = np.einsum("timjm->tij", full)
    mech_pop = np.einsum("timim->tm", full).real
    tail = float(mech_pop[:, -2:].sum(axis=1).max())
    if tail > 1e-3:
        warnings.warn(
            f"mechanical truncation leakage: top-two-level population {tail:.2e}",
            UserWarning)
    return SingleModeResult(times=sol.t, states=states, mech_tail=tail)
