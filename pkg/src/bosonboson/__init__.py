"""Simulation toolkit for a driven, lossy cavity mode whose frequency is
modulated by a continuum bosonic bath: weak-driving perturbation theory for
spectra and photon statistics, plus a numerically exact tensor-network
path-integral propagator."""

from .bath import (
    BathSpec,
    SignedTimeTuple,
    bath_correlation,
    f2,
    memory_kernel_coefficients,
    polaron_shift,
    spectral_density,
    twice_integrated_kernel,
    wick_exponent,
)
from .observables import (
    CavityState,
    PhotonStatistics,
    SteadyStateFit,
    WignerGrid,
    find_t_star,
    photon_statistics,
    steady_state_occupation,
    wigner,
)
from .oracles import (
    DiscreteBath,
    SingleModeSpec,
    discretize_bath,
    full_path_sum,
    gaussian_correlator_oracle,
    single_mode_dynamics,
)
from .spectra import (
    QuadratureConfig,
    SpectrumResult,
    WeakDriveProblem,
    g2_decorrelated,
    g2_full,
    resonance,
    spectrum_numeric,
    spectrum_ohmic_analytic,
    spectrum_scan,
    spectrum_superohmic_series,
)
from .tempo import (
    AugmentedState,
    BondDimensionError,
    SystemSpec,
    TempoConfig,
    TempoResult,
    load_checkpoint,
    run,
    save_checkpoint,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "SignedTimeTuple",
    "bath_correlation",
    "f2",
    "memory_kernel_coefficients",
    "polaron_shift",
    "spectral_density",
    "twice_integrated_kernel",
    "wick_exponent",
    "QuadratureConfig",
    "SpectrumResult",
    "WeakDriveProblem",
    "g2_decorrelated",
    "g2_full",
    "resonance",
    "spectrum_numeric",
    "spectrum_ohmic_analytic",
    "spectrum_scan",
    "spectrum_superohmic_series",
    "AugmentedState",
    "BondDimensionError",
    "SystemSpec",
    "TempoConfig",
    "TempoResult",
    "load_checkpoint",
    "run",
    "save_checkpoint",
    "CavityState",
    "PhotonStatistics",
    "SteadyStateFit",
    "WignerGrid",
    "find_t_star",
    "photon_statistics",
    "steady_state_occupation",
    "wigner",
    "DiscreteBath",
    "SingleModeSpec",
    "discretize_bath",
    "full_path_sum",
    "gaussian_correlator_oracle",
    "single_mode_dynamics",
    "__version__",
]
