"""Dense Liouville-space helpers for a driven, damped cavity mode.

Density matrices are vectorized row-major, vec(rho)[n*d + m] = rho[n, m],
so a sandwich A rho B maps to (A kron B^T) acting on vec(rho).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm


def annihilation(d: int) -> np.ndarray:
    """Truncated annihilation operator on a d-level Fock space."""
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)


def number_op(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float))


def cavity_hamiltonian(d: int, delta_c: float, eta: float) -> np.ndarray:
    """H = -delta_c c^dag c + (eta/2)(c + c^dag) in the drive rotating frame."""
    c = annihilation(d)
    return -delta_c * number_op(d) + 0.5 * eta * (c + c.conj().T)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(rho).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> a rho b."""
    return np.kron(a, b.T)


def liouvillian(d: int, delta_c: float, eta: float, kappa: float) -> np.ndarray:
    """Generator of the bare driven-damped cavity.

    d rho/dt = -i[H, rho] + (kappa/2)(2 c rho c^dag - c^dag c rho - rho c^dag c)
    """
    h = cavity_hamiltonian(d, delta_c, eta)
    c = annihilation(d)
    cd = c.conj().T
    n = cd @ c
    eye = np.eye(d)
    lv = -1j * (sandwich(h, eye) - sandwich(eye, h))
    lv += 0.5 * kappa * (2.0 * sandwich(c, cd) - sandwich(n, eye) - sandwich(eye, n))
    return lv


def propagator(d: int, delta_c: float, eta: float, kappa: float, dt: float) -> np.ndarray:
    """exp(L dt) for the bare-cavity Liouvillian."""
    return expm(liouvillian(d, delta_c, eta, kappa) * dt)


def driven_cavity_expectations(delta_c: float, eta: float, kappa: float,
                               t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form <c>(t) and <c^dag c>(t) for the bare cavity from vacuum.

    The dynamics is linear, so the state stays coherent and
    <c^dag c> = |<c>|^2.
    """
    t = np.asarray(t, dtype=float)
    pole = 1j * delta_c - 0.5 * kappa
    with np.errstate(invalid="ignore", divide="ignore"):
        amp = np.where(
            np.abs(pole) > 0,
            (-0.5j * eta) * (np.expm1(pole * t)) / pole,
            (-0.5j * eta) * t,
        )
    return amp, np.abs(amp) ** 2
