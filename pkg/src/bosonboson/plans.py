"""Flat key=value experiment plans.

A plan is a text file with one `key = value` assignment per line; `#`
starts a comment. All frequencies and rates are divided by omega_c on
load, times are multiplied by it, so the rest of the package only ever
sees omega_c = 1 units. Grids are written either as a single number, a
comma list, or `start:stop:count`; `delta_c` additionally accepts the
word `resonance`, resolved per coupling strength from the closed-form
peak location.

Schema (keys marked t form the tempo block: required for `dynamics`,
optional as a whole for `g2`, where they add slow steady-state
cross-check columns):

    kind            spectrum | g2 | dynamics
    s               bath exponent (1 = ohmic, 2 = superohmic)
    alpha           coupling, may be a list (sweep axis)
    omega_c         unit frequency, default 1.0
    kappa           cavity decay
    eta             drive amplitude (g2/dynamics)
    delta_c         drive detuning: number | list | start:stop:count | resonance
    method          auto | numeric | closed   (spectrum and g2)
    dim          t  cavity truncation
    dt           t  Trotter step
    t_final      t  evolution time
    memory_steps t  influence-functional memory window
    svd_cutoff   t  relative singular-value cutoff
    max_bond        hard cap, default 256
    readout_stride  record every n-th step, default 1
    checkpoint_every  steps between checkpoint writes (dynamics only)
    wigner_extent   half-width of the Wigner grid, default 4.0
    wigner_points   grid points per axis, default 101
    out             output file stem (CSV + JSON manifest derive from it)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_KINDS = ("spectrum", "g2", "dynamics")
_METHODS = ("auto", "numeric", "closed")

# key -> (kinds that accept it, kinds that require it); g2 plans accept the
# tempo block to add steady-state cross-check columns
_TEMPO_KEYS = ("dim", "dt", "t_final", "memory_steps", "svd_cutoff")
_SCHEMA = {
    "kind": (_KINDS, _KINDS),
    "s": (_KINDS, _KINDS),
    "alpha": (_KINDS, _KINDS),
    "omega_c": (_KINDS, ()),
    "kappa": (_KINDS, _KINDS),
    "eta": (("g2", "dynamics"), ()),
    "delta_c": (_KINDS, _KINDS),
    "method": (("spectrum", "g2"), ()),
    "dim": (("g2", "dynamics"), ("dynamics",)),
    "dt": (("g2", "dynamics"), ("dynamics",)),
    "t_final": (("g2", "dynamics"), ("dynamics",)),
    "memory_steps": (("g2", "dynamics"), ("dynamics",)),
    "svd_cutoff": (("g2", "dynamics"), ("dynamics",)),
    "max_bond": (("g2", "dynamics"), ()),
    "readout_stride": (("g2", "dynamics"), ()),
    "checkpoint_every": (("dynamics",), ()),
    "wigner_extent": (("dynamics",), ()),
    "wigner_points": (("dynamics",), ()),
    "out": (_KINDS, _KINDS),
}


class PlanError(ValueError):
    """Invalid plan file; `problems` lists machine-readable records."""

    def __init__(self, problems):
        self.problems = list(problems)
        msg = "; ".join(f"{p['key']}: {p['message']}" for p in self.problems)
        super().__init__(f"invalid plan: {msg}")


def _parse_axis(text: str):
    """number | comma list | start:stop:count -> strictly ordered array."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range form must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("count must be >= 1")
        if count > 1 and stop <= start:
            raise ValueError("range must be strictly increasing")
        return np.linspace(start, stop, count)
    values = np.array([float(v) for v in text.split(",") if v.strip() != ""])
    if values.size == 0:
        raise ValueError("empty grid")
    if np.any(np.diff(values) <= 0):
        raise ValueError("grid values must be strictly increasing")
    return values


@dataclass(frozen=True)
class ExperimentPlan:
    """Resolved, omega_c-normalized description of one experiment."""

    kind: str
    s: float
    alphas: tuple
    omega_c: float
    kappa: float
    eta: float
    delta_c_raw: str
    method: str
    out: str
    dim: int = 0
    dt: float = 0.0
    t_final: float = 0.0
    memory_steps: int = 0
    svd_cutoff: float = 0.0
    max_bond: int = 256
    readout_stride: int = 1
    checkpoint_every: int = 0
    wigner_extent: float = 4.0
    wigner_points: int = 101
    source: dict = field(default_factory=dict, compare=False)

    @property
    def has_tempo(self) -> bool:
        return self.dim > 0

    def delta_grid(self, alpha: float) -> np.ndarray:
        """Detuning axis in omega_c units; `resonance` resolves per alpha."""
        if self.delta_c_raw.strip() == "resonance":
            from .spectra import WeakDriveProblem, resonance
            from .bath import BathSpec
            prob = WeakDriveProblem(
                bath=BathSpec(alpha=alpha, s=self.s, omega_c=1.0),
                kappa=self.kappa, eta=self.eta)
            return np.array([resonance(prob)])
        return _parse_axis(self.delta_c_raw)

    def resolved(self) -> dict:
        """Full configuration for the manifest, omega_c units."""
        out = {k: v for k, v in self.__dict__.items() if k != "source"}
        out["alphas"] = list(self.alphas)
        return out


def parse_plan(path_or_text) -> ExperimentPlan:
    if isinstance(path_or_text, Path) or (
            isinstance(path_or_text, str) and "\n" not in path_or_text
            and "=" not in path_or_text):
        text = Path(path_or_text).read_text()
    else:
        text = str(path_or_text)

    raw, problems = {}, []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            problems.append({"key": f"line {lineno}",
                             "message": "expected key = value"})
            continue
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _SCHEMA:
            problems.append({"key": key, "message": "unknown key"})
        elif key in raw:
            problems.append({"key": key, "message": "duplicate key"})
        else:
            raw[key] = value
    if problems:
        raise PlanError(problems)

    kind = raw.get("kind", "")
    if kind not in _KINDS:
        raise PlanError([{"key": "kind",
                          "message": f"must be one of {', '.join(_KINDS)}"}])
    for key, (accepted, required) in _SCHEMA.items():
        if key in raw and kind not in accepted:
            problems.append({"key": key,
                             "message": f"not valid for kind={kind}"})
        if kind in required and key not in raw:
            problems.append({"key": key, "message": "required key missing"})
    if kind == "g2":
        present = [k for k in _TEMPO_KEYS if k in raw]
        if present and len(present) != len(_TEMPO_KEYS):
            missing = sorted(set(_TEMPO_KEYS) - set(present))
            problems.append({"key": missing[0],
                             "message": "tempo block needs all of "
                                        + ", ".join(_TEMPO_KEYS)})
    if problems:
        raise PlanError(problems)

    def grab(key, conv, default=None):
        if key not in raw:
            return default
        try:
            return conv(raw[key])
        except (ValueError, TypeError) as exc:
            problems.append({"key": key, "message": str(exc)})
            return default

    omega_c = grab("omega_c", float, 1.0)
    s = grab("s", float)
    kappa = grab("kappa", float)
    eta = grab("eta", float, 0.0)
    method = grab("method", str, "auto")
    alphas = grab("alpha", _parse_axis)
    delta_raw = raw["delta_c"].strip()
    if delta_raw != "resonance":
        grab("delta_c", _parse_axis)  # syntax check only
    if problems:
        raise PlanError(problems)

    if omega_c <= 0:
        problems.append({"key": "omega_c", "message": "must be > 0"})
    if s not in (1.0, 2.0):
        problems.append({"key": "s", "message": "only s = 1 and s = 2 ship"})
    if kappa is not None and kappa <= 0:
        problems.append({"key": "kappa", "message": "must be > 0"})
    if eta < 0:
        problems.append({"key": "eta", "message": "must be >= 0"})
    if alphas is not None and np.any(alphas < 0):
        problems.append({"key": "alpha", "message": "must be >= 0"})
    if method not in _METHODS:
        problems.append({"key": "method",
                         "message": f"must be one of {', '.join(_METHODS)}"})
    if kind == "dynamics" and delta_raw != "resonance" \
            and _parse_axis(delta_raw).size != 1:
        problems.append({"key": "delta_c",
                         "message": "dynamics takes a single detuning"})
    if kind == "dynamics" and alphas is not None and len(alphas) != 1:
        problems.append({"key": "alpha",
                         "message": "dynamics takes a single alpha"})
    if problems:
        raise PlanError(problems)

    # normalize to omega_c units: rates divide, times multiply
    scale = dict(
        kind=kind, s=s, omega_c=omega_c,
        alphas=tuple(float(a) for a in alphas),
        kappa=kappa / omega_c, eta=eta / omega_c,
        delta_c_raw=delta_raw if delta_raw == "resonance" else ",".join(
            repr(float(v) / omega_c) for v in _parse_axis(delta_raw)),
        method=method, out=raw["out"], source=dict(raw),
    )
    if kind == "dynamics" or (kind == "g2" and "dim" in raw):
        dt = grab("dt", float)
        t_final = grab("t_final", float)
        scale.update(
            dim=grab("dim", int),
            memory_steps=grab("memory_steps", int),
            svd_cutoff=grab("svd_cutoff", float),
            max_bond=grab("max_bond", int, 256),
            readout_stride=grab("readout_stride", int, 1),
            checkpoint_every=grab("checkpoint_every", int, 0),
            wigner_extent=grab("wigner_extent", float, 4.0),
            wigner_points=grab("wigner_points", int, 101),
        )
        if problems:
            raise PlanError(problems)
        scale.update(dt=dt * omega_c, t_final=t_final * omega_c)
    return ExperimentPlan(**scale)
