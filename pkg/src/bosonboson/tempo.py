"""Tensor-network path-integral propagation of the driven, damped cavity.

The reduced dynamics is a sum over Liouville-index paths j_1..j_N, each
weighted by the free propagator between steps and by pairwise influence
couplings

    I_dk[j, j'] = exp[-(n+ - n-)(M_dk m+ - conj(M_dk) m-)],

where j = (n+, n-) is the later index, j' = (m+, m-) the one dk steps
earlier, and M_dk are the discrete memory-kernel coefficients. The running
path sum (augmented density tensor) is stored as an MPS over the last K
step indices and compressed by singular-value truncation after every step.

The new step index couples to every retained site through a weight that
depends on the new index only via x = n+ - n-, which takes q = 2d-1 values.
A step therefore seeds the new site with an x-graded bond and zips the
grading leftward, multiplying site i by W_lag[x, j_i] on the way; the bond
is closed against ones at the oldest site. Every zip SVD leaves the sites
to its right right-canonical, so the final left-to-right sweep truncates
each bond against an orthonormal environment.

Carrying the raw x alphabet costs a factor q on every zip SVD. Since the
kernel decays, the map from x to the product of remaining lag weights has
low numerical rank, so the weight chain is pre-compressed once into MPO
cores A_k[p, j, p'] over rank-r_k bonds. The compression spans the partial
products of every tail length (an all-ones column joins each stage), which
keeps one core set valid at any chain length, growth phase included.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.linalg import expm

from .bath import BathSpec, memory_kernel_coefficients
from .liouville import liouvillian, vec

_CHECKPOINT_MAGIC = b"BBADT1\n"
_CHECKPOINT_VERSION = 1


class BondDimensionError(RuntimeError):
    """Raised when a truncated bond still exceeds the hard cap."""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SystemSpec:
    """Driven damped cavity coupled to the bath through c^dag c."""

    bath: BathSpec
    kappa: float
    delta_c: float = 0.0
    eta: float = 0.0
    dim: int = 4

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("cavity truncation dim must be >= 2")
        if self.kappa < 0:
            raise ValueError("cavity decay kappa must be >= 0")


@dataclass(frozen=True)
class TempoConfig:
    dt: float
    t_final: float
    memory_steps: int
    svd_cutoff: float = 1e-6
    max_bond: int = 256
    readout_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.t_final < self.dt:
            raise ValueError("t_final must cover at least one step")
        if self.memory_steps < 1:
            raise ValueError("memory_steps must be >= 1")
        if not 0.0 <= self.svd_cutoff < 1.0:
            raise ValueError("svd_cutoff must lie in [0, 1)")
        if self.readout_stride < 1:
            raise ValueError("readout_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class AugmentedState:
    """MPS over the retained step indices, oldest site first.

    trace_drift holds the largest per-step trace deviation removed by
    renormalization since the last readout; exact propagation conserves
    the trace, so the deviation measures pure truncation error.
    """

    sites: list
    step_count: int = 0
    discarded_weight: float = 0.0
    trace_drift: float = 0.0

    @property
    def bond_profile(self) -> tuple:
        return tuple(s.shape[2] for s in self.sites[:-1])

    @property
    def max_bond(self) -> int:
        return max((s.shape[0] for s in self.sites), default=0)


@dataclass(frozen=True)
class InfluenceTensors:
    i0: np.ndarray         # (d2,) self-coupling of each new index
    lag: tuple             # lag[l-1]: (q, d2) weight W_l[x, j_earlier]
    x_index: np.ndarray    # (d2,) int, position of x(j) in x_values
    x_values: np.ndarray   # (q,)
    mem: np.ndarray        # (K+1,) kernel coefficients M_0..M_K
    source: np.ndarray     # (d2, r_0) new-index emission in the core basis
    cores: tuple           # cores[k-1]: (r_{k-1}, d2, r_k) lag-k MPO core
    closure: tuple         # closure[c]: (r_c,) chain termination after lag c

    def dense(self, dk: int) -> np.ndarray:
        """Full (d2, d2) matrix I_dk[j_later, j_earlier] for small oracles."""
        if dk == 0:
            return np.diag(self.i0)
        return self.lag[dk - 1][self.x_index, :]


@dataclass
class TempoDiagnostics:
    trace_error: np.ndarray
    herm_error: np.ndarray
    min_eigenvalue: np.ndarray
    max_bond: np.ndarray
    discarded_weight: np.ndarray
    renormalization_drift: np.ndarray

    def worst(self) -> dict:
        return {
            "trace_error": float(np.max(self.trace_error)),
            "herm_error": float(np.max(self.herm_error)),
            "min_eigenvalue": float(np.min(self.min_eigenvalue)),
            "max_bond": int(np.max(self.max_bond)),
            "discarded_weight": float(self.discarded_weight[-1]),
            "renormalization_drift": float(np.max(self.renormalization_drift)),
        }


@dataclass
class TempoResult:
    times: np.ndarray
    states: np.ndarray           # (n_out, d, d)
    diagnostics: TempoDiagnostics
    final: AugmentedState


def build_free_propagator(system: SystemSpec, dt: float) -> np.ndarray:
    """exp(L0 dt/2): half-step of the bare driven-damped cavity, applied
    symmetrically around the influence couplings of each step."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    l0 = liouvillian(system.dim, system.delta_c, system.eta, system.kappa)
    return expm(l0 * (0.5 * dt))


def build_influence_tensors(system: SystemSpec, dt: float, memory_steps: int,
                            mpo_cutoff: float = 0.0) -> InfluenceTensors:
    d = system.dim
    mem = memory_kernel_coefficients(system.bath, dt, memory_steps)
    n_plus, n_minus = np.divmod(np.arange(d * d), d)
    x = n_plus - n_minus
    x_values = np.arange(-(d - 1), d)
    x_index = x + (d - 1)
    i0 = np.exp(-x * (mem[0] * n_plus - np.conj(mem[0]) * n_minus))
    lag = tuple(
        np.exp(-np.outer(x_values, mem[k] * n_plus - np.conj(mem[k]) * n_minus))
        for k in range(1, memory_steps + 1))

    # Compress the x alphabet: basis[c] spans, over x, the partial products
    # of lag weights k = c+1 .. L for every L <= K (the ones column is the
    # empty product, so the same cores serve chains of any length).
    q = 2 * d - 1
    basis = [None] * (memory_steps + 1)
    grow = np.ones((q, 1), dtype=complex)
    for c in range(memory_steps, -1, -1):
        u, s, _ = np.linalg.svd(grow, full_matrices=False)
        keep = max(1, int(np.count_nonzero(s > mpo_cutoff * s[0]))) \
            if s[0] > 0 else 1
        basis[c] = u[:, :keep]
        if c > 0:
            scaled = u[:, :keep] * s[:keep]
            grow = np.concatenate(
                [np.ones((q, 1), dtype=complex),
                 (lag[c - 1][:, :, None] * scaled[:, None, :]).reshape(q, -1)],
                axis=1)
    cores = tuple(
        np.einsum("xp,xj,xq->pjq", basis[k - 1].conj(), lag[k - 1], basis[k])
        for k in range(1, memory_steps + 1))
    closure = (None,) + tuple(b.sum(axis=0).conj() for b in basis[1:])
    return InfluenceTensors(i0=i0, lag=lag, x_index=x_index,
                            x_values=x_values, mem=mem,
                            source=basis[0][x_index, :], cores=cores,
                            closure=closure)


def _svd_truncate(mat: np.ndarray, cutoff: float, max_bond=None):
    """Economy SVD keeping relative singular values above cutoff.

    Returns (u, s, vh, discarded) with discarded the relative weight
    sum(s_dropped^2)/sum(s^2). max_bond, when given, is a hard cap:
    exceeding it raises instead of truncating further. Intermediate zip
    bonds are structurally larger than the settled ones, so the cap is
    enforced only on the final sweep.
    """
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s[0] <= 0.0:
        return u[:, :1], s[:1], vh[:1], 0.0
    keep = int(np.count_nonzero(s > cutoff * s[0]))
    keep = max(keep, 1)
    if max_bond is not None and keep > max_bond:
        raise BondDimensionError(
            f"bond dimension {keep} exceeds hard cap {max_bond}")
    total = float(np.dot(s, s))
    dropped = float(np.dot(s[keep:], s[keep:]))
    return u[:, :keep], s[:keep], vh[:keep], dropped / total


def step(state: AugmentedState, tensors: InfluenceTensors,
         propagator: np.ndarray, config: TempoConfig) -> AugmentedState:
    """Advance the ADT by one step: grow, zip the new couplings leftward,
    drop the oldest site past the memory window, recompress left-to-right."""
    sites = state.sites
    length = len(sites)
    d2 = propagator.shape[0]
    cutoff = config.svd_cutoff
    p_full = propagator @ propagator
    discarded = state.discarded_weight

    # gate[p, jk, j'] collects everything the new index j' attaches to the
    # newest old site: emission into the core basis, the lag-1 core, the
    # self-coupling, and the full-step propagator
    gate = np.einsum("jP,PkQ->Qkj", tensors.source, tensors.cores[0]) \
        * p_full.T[None, :, :] * tensors.i0[None, None, :]
    r1 = gate.shape[0]

    last = sites[-1]
    a = last.shape[0]
    core = last[:, None, :, 0, None] * gate[None, :, :, :]
    u, s, vh, drop = _svd_truncate(core.reshape(a * r1 * d2, d2), cutoff)
    discarded += drop
    new_last = vh.reshape(-1, d2, 1)
    carry = (u * s).reshape(a, r1, d2, -1)

    m = carry.shape[-1]
    u, s, vh, drop = _svd_truncate(carry.reshape(a * r1, d2 * m), cutoff)
    discarded += drop
    updated = [vh.reshape(-1, d2, m), new_last]
    carry = (u * s).reshape(a, r1, -1)

    if length == 1:
        ended = np.tensordot(tensors.closure[1], carry[0], axes=(0, 0))
        updated[0] = np.tensordot(ended, updated[0], axes=(0, 0))[None, :, :]
    else:
        for i in range(length - 2, -1, -1):
            core_k = tensors.cores[length - i - 1]
            g = np.tensordot(sites[i], carry, axes=(2, 0))   # (a', j, p, r)
            g = np.einsum("PjQ,ajPr->aQjr", core_k, g)
            if i == 0:
                updated.insert(0, np.einsum(
                    "aQjr,Q->ajr", g, tensors.closure[length]))
                break
            al, rq, _, r = g.shape
            u, s, vh, drop = _svd_truncate(g.reshape(al * rq, d2 * r), cutoff)
            discarded += drop
            updated.insert(0, vh.reshape(-1, d2, r))
            carry = (u * s).reshape(al, rq, -1)

    if len(updated) > config.memory_steps:
        head = updated.pop(0).sum(axis=1)[0]     # marginalize the oldest index
        updated[0] = np.tensordot(head, updated[0], axes=(0, 0))[None, :, :]

    for i in range(len(updated) - 1):
        al, _, b = updated[i].shape
        u, s, vh, drop = _svd_truncate(updated[i].reshape(al * d2, b),
                                       cutoff, config.max_bond)
        discarded += drop
        updated[i] = u.reshape(al, d2, -1)
        updated[i + 1] = np.tensordot(s[:, None] * vh, updated[i + 1],
                                      axes=(1, 0))

    # exact propagation conserves the trace (diagonal indices carry x = 0
    # and the bare half-steps are Lindblad maps), so any deviation is
    # truncation noise: divide it out and log its size
    d = int(round(np.sqrt(d2)))
    trace = _marginal_weight(updated)[:: d + 1].sum()
    drift = abs(trace - 1.0)
    if abs(trace) > 0.5:
        updated[-1] = updated[-1] / trace

    return AugmentedState(sites=updated, step_count=state.step_count + 1,
                          discarded_weight=discarded,
                          trace_drift=max(state.trace_drift, drift))


def _marginal_weight(sites: list) -> np.ndarray:
    """Vectorized reduced state before the trailing half-step: sum every
    retained index except the newest."""
    if len(sites) == 1:
        return sites[0][0, :, 0]
    v = sites[0].sum(axis=1)[0]
    for s in sites[1:-1]:
        v = v @ s.sum(axis=1)
    return np.tensordot(v, sites[-1][:, :, 0], axes=(0, 0))


def readout(state: AugmentedState, half_propagator: np.ndarray) -> np.ndarray:
    """Reduced density matrix: marginalize all but the newest index, then
    apply the trailing half-step."""
    rho_vec = half_propagator @ _marginal_weight(state.sites)
    d = int(round(np.sqrt(rho_vec.size)))
    return rho_vec.reshape(d, d)


def _initial_state(system: SystemSpec, tensors: InfluenceTensors,
                   half_propagator: np.ndarray, rho0) -> AugmentedState:
    d = system.dim
    if rho0 is None:
        rho0 = np.zeros((d, d), dtype=complex)
        rho0[0, 0] = 1.0
    site = tensors.i0 * (half_propagator @ vec(np.asarray(rho0, dtype=complex)))
    return AugmentedState(sites=[site.reshape(1, d * d, 1)], step_count=1)


def _hygiene(rho: np.ndarray):
    tr_err = abs(np.trace(rho) - 1.0)
    herm = np.linalg.norm(rho - rho.conj().T)
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return float(tr_err), float(herm), min_eig


def run(system: SystemSpec, config: TempoConfig, rho0=None, observer=None,
        checkpoint_path=None, checkpoint_every=None,
        resume_from=None) -> TempoResult:
    """Propagate to t_final, recording the cavity state every readout_stride
    steps. observer(step_index, rho) is called at the same stride."""
    half = build_free_propagator(system, config.dt)
    tensors = build_influence_tensors(system, config.dt, config.memory_steps,
                                      mpo_cutoff=0.01 * config.svd_cutoff)

    if resume_from is not None:
        ck = resume_from if isinstance(resume_from, TempoCheckpoint) \
            else load_checkpoint(resume_from)
        if ck.system != system:
            raise ValueError("checkpoint was produced by a different system")
        for name in ("dt", "memory_steps", "svd_cutoff", "max_bond",
                     "readout_stride"):
            if getattr(ck.config, name) != getattr(config, name):
                raise ValueError(f"checkpoint config mismatch on {name}")
        state = ck.state
        times = list(ck.times)
        states = list(ck.states)
        hygiene = [list(row) for row in ck.hygiene]
    else:
        state = _initial_state(system, tensors, half, rho0)
        times, states, hygiene = [], [], [[] for _ in range(6)]
        _record(state, half, config, times, states, hygiene, observer)

    while state.step_count < config.n_steps:
        state = step(state, tensors, half, config)
        _record(state, half, config, times, states, hygiene, observer)
        if checkpoint_path is not None and checkpoint_every is not None \
                and state.step_count % checkpoint_every == 0 \
                and state.step_count < config.n_steps:
            save_checkpoint(checkpoint_path, system, config, state,
                            times, states, hygiene)

    diag = TempoDiagnostics(
        trace_error=np.array(hygiene[0]),
        herm_error=np.array(hygiene[1]),
        min_eigenvalue=np.array(hygiene[2]),
        max_bond=np.array(hygiene[3], dtype=int),
        discarded_weight=np.array(hygiene[4]),
        renormalization_drift=np.array(hygiene[5]),
    )
    return TempoResult(times=np.array(times),
                       states=np.array(states),
                       diagnostics=diag, final=state)


def _record(state, half, config, times, states, hygiene, observer):
    if state.step_count % config.readout_stride and \
            state.step_count != config.n_steps:
        return
    rho = readout(state, half)
    tr_err, herm, min_eig = _hygiene(rho)
    times.append(state.step_count * config.dt)
    states.append(rho)
    hygiene[0].append(tr_err)
    hygiene[1].append(herm)
    hygiene[2].append(min_eig)
    hygiene[3].append(state.max_bond)
    hygiene[4].append(state.discarded_weight)
    hygiene[5].append(state.trace_drift)
    state.trace_drift = 0.0
    if observer is not None:
        observer(state.step_count, rho)


@dataclass
class TempoCheckpoint:
    system: SystemSpec
    config: TempoConfig
    state: AugmentedState
    times: list
    states: list
    hygiene: list


def _config_blob(system: SystemSpec, config: TempoConfig,
                 state: AugmentedState, n_records: int) -> dict:
    return {
        "bath": asdict(system.bath),
        "system": {"kappa": system.kappa, "delta_c": system.delta_c,
                   "eta": system.eta, "dim": system.dim},
        "config": asdict(config),
        "step_count": state.step_count,
        "discarded_weight": state.discarded_weight,
        "trace_drift": state.trace_drift,
        "site_shapes": [list(s.shape) for s in state.sites],
        "n_records": n_records,
    }


def save_checkpoint(path, system: SystemSpec, config: TempoConfig,
                    state: AugmentedState, times, states, hygiene) -> None:
    blob = json.dumps(_config_blob(system, config, state, len(times)),
                      sort_keys=True).encode()
    buf = io.BytesIO()
    buf.write(_CHECKPOINT_MAGIC)
    buf.write(struct.pack("<II", _CHECKPOINT_VERSION, len(blob)))
    buf.write(blob)
    for s in state.sites:
        buf.write(np.ascontiguousarray(s, dtype=complex).tobytes())
    buf.write(np.asarray(times, dtype=float).tobytes())
    buf.write(np.asarray(states, dtype=complex).tobytes())
    for row in hygiene:
        buf.write(np.asarray(row, dtype=float).tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_checkpoint(path) -> TempoCheckpoint:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(_CHECKPOINT_MAGIC):
        raise ValueError("not a checkpoint file")
    off = len(_CHECKPOINT_MAGIC)
    version, blob_len = struct.unpack_from("<II", raw, off)
    if version != _CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    off += 8
    meta = json.loads(raw[off:off + blob_len].decode())
    off += blob_len

    system = SystemSpec(bath=BathSpec(**meta["bath"]), **meta["system"])
    config = TempoConfig(**meta["config"])
    sites = []
    for shape in meta["site_shapes"]:
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype=complex, count=count, offset=off)
        sites.append(arr.reshape(shape).copy())
        off += count * 16
    state = AugmentedState(sites=sites, step_count=meta["step_count"],
                           discarded_weight=meta["discarded_weight"],
                           trace_drift=meta["trace_drift"])

    n = meta["n_records"]
    times = np.frombuffer(raw, dtype=float, count=n, offset=off).tolist()
    off += n * 8
    d = system.dim
    states_flat = np.frombuffer(raw, dtype=complex, count=n * d * d, offset=off)
    states = [m.copy() for m in states_flat.reshape(n, d, d)]
    off += n * d * d * 16
    hygiene = []
    for _ in range(6):
        hygiene.append(np.frombuffer(raw, dtype=float, count=n,
                                     offset=off).tolist())
        off += n * 8
    return TempoCheckpoint(system=system, config=config, state=state,
                           times=times, states=states, hygiene=hygiene)
