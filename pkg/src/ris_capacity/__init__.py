"""Ergodic mutual information of multi-RIS MIMO links: deterministic
equivalents, correlation spectra, phase and placement optimization, and
Monte Carlo validation."""

from .channel import (
    CorrelationMatrix,
    QuadratureError,
    RisGeometry,
    RisSpec,
    SystemConfig,
    WeightFunction,
    build_correlation,
    pathloss_gamma,
    sample_channel,
)
from .detequiv import (
    FixedPointError,
    FixedPointSolution,
    MiStatistics,
    analyze,
    ergodic_mi,
    lambda_matrix,
    outage_mi,
    psd_sqrt,
    sigma_k,
    solve_fixed_point,
    variance,
)
from .montecarlo import MonteCarloResult, empirical_cdf, simulate
from .optimizer import (
    KappaMatrix,
    PhaseProfile,
    alternating_optimize,
    analytic_phases,
    kappa_matrix,
    numeric_phases,
    optimal_placement,
    placement_scan,
)
from .spectra import (
    SpectralDensity,
    circulant_approximation,
    eta_density,
    fourier_mode,
    spectral_density,
    theoretical_eigen_cdf,
)

__all__ = [
    "CorrelationMatrix",
    "QuadratureError",
    "RisGeometry",
    "RisSpec",
    "SystemConfig",
    "WeightFunction",
    "build_correlation",
    "pathloss_gamma",
    "sample_channel",
    "FixedPointError",
    "FixedPointSolution",
    "MiStatistics",
    "analyze",
    "ergodic_mi",
    "lambda_matrix",
    "outage_mi",
    "psd_sqrt",
    "sigma_k",
    "solve_fixed_point",
    "variance",
    "MonteCarloResult",
    "empirical_cdf",
    "simulate",
    "KappaMatrix",
    "PhaseProfile",
    "alternating_optimize",
    "analytic_phases",
    "kappa_matrix",
    "numeric_phases",
    "optimal_placement",
    "placement_scan",
    "SpectralDensity",
    "circulant_approximation",
    "eta_density",
    "fourier_mode",
    "spectral_density",
    "theoretical_eigen_cdf",
]
