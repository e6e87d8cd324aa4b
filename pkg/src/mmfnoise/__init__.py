"""Memory multi-fractional Brownian motion noise and qubit decoherence.

Submodules: :mod:`~mmfnoise.numerics` (special functions, quadrature, fits,
random streams), :mod:`~mmfnoise.mmfbm` (covariances and path sampling),
:mod:`~mmfnoise.spectral` (PSD and Hurst estimation), :mod:`~mmfnoise.sde`
(energy-fluctuation SDE, T1/T2), :mod:`~mmfnoise.bath` (time-dependent
Caldeira-Leggett bath and dephasing), :mod:`~mmfnoise.gateopt` (gate-time
optimization) and :mod:`~mmfnoise.cli`.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (AdiabaticityWarning, ConfigError, DomainError, EstimationError, FitError, MmfError,
                     NumericError, NumericWarning, OptimizationError, SchemaError)
from .mmfbm import (CovarianceModel, HurstProfile, NoiseEnsemble, NoisePath, TimeGrid, build_covariance_matrix,
                    covariance, cumulative_paths, sample_fgn_circulant, sample_paths_cholesky)
from .spectral import hurst_from_coherence, hurst_from_psd, hurst_from_variance, welch_psd
from .sde import SdeConfig, estimate_t1, estimate_t2, simulate_energy, simulate_ensemble
from .bath import BathSpec, FilterKind, PowerLawNoise, dephasing_chi, noise_kernel, dissipation_kernel
from .gateopt import GateModel, optimal_gate_time

__all__ = [
    "__version__", "BACKEND",
    "MmfError", "DomainError", "NumericError", "FitError", "EstimationError", "OptimizationError",
    "ConfigError", "SchemaError", "NumericWarning", "AdiabaticityWarning",
    "HurstProfile", "TimeGrid", "CovarianceModel", "NoisePath", "NoiseEnsemble", "covariance",
    "build_covariance_matrix", "sample_paths_cholesky", "sample_fgn_circulant", "cumulative_paths",
    "welch_psd", "hurst_from_psd", "hurst_from_variance", "hurst_from_coherence",
    "SdeConfig", "simulate_energy", "simulate_ensemble", "estimate_t1", "estimate_t2",
    "BathSpec", "PowerLawNoise", "FilterKind", "dephasing_chi", "noise_kernel", "dissipation_kernel",
    "GateModel", "optimal_gate_time",
]
