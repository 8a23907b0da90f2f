"""Inverse-Wishart random matrices: sampling, orthogonal-polynomial kernels,
Monte Carlo verification and ergodic-parameter extraction."""

from .ensembles import (
    EnsembleParams,
    RngStream,
    corner_spectra,
    inverse_wishart_matrices,
    laguerre_spectra,
    mu_spectra,
    sample_corner_given_spectrum,
    sample_haar_unitary,
    sample_inverse_wishart,
    sample_laguerre_spectrum,
    sample_mu_spectrum,
    sample_wishart,
    wishart_matrices,
)
from .ergodic import (
    CornerTrajectory,
    OmegaPoint,
    corner_trajectory,
    decomposition_check,
    evaluate_F_omega,
    extract_omega,
    gamma_diagnostics,
)
from .hermitian import ConvergenceError, EigenDecomposition, HermitianMatrix, Spectrum, eigen_decompose
from .kernels import KernelSpec, bessel_kernel, laguerre_kernel, limit_kernel, rescaled_kernel
from .orthopoly import MonicOPS, bessel_monic_construct, laguerre_monic_eval
from .stats import TestReport, consistency_test, dpp_correlation_test, empirical_rho1, ks_two_sample

__version__ = "0.1.0"

__all__ = [
    "EnsembleParams",
    "RngStream",
    "corner_spectra",
    "inverse_wishart_matrices",
    "laguerre_spectra",
    "mu_spectra",
    "sample_corner_given_spectrum",
    "sample_haar_unitary",
    "sample_inverse_wishart",
    "sample_laguerre_spectrum",
    "sample_mu_spectrum",
    "sample_wishart",
    "wishart_matrices",
    "CornerTrajectory",
    "OmegaPoint",
    "corner_trajectory",
    "decomposition_check",
    "evaluate_F_omega",
    "extract_omega",
    "gamma_diagnostics",
    "ConvergenceError",
    "EigenDecomposition",
    "HermitianMatrix",
    "Spectrum",
    "eigen_decompose",
    "KernelSpec",
    "bessel_kernel",
    "laguerre_kernel",
    "limit_kernel",
    "rescaled_kernel",
    "MonicOPS",
    "bessel_monic_construct",
    "laguerre_monic_eval",
    "TestReport",
    "consistency_test",
    "dpp_correlation_test",
    "empirical_rho1",
    "ks_two_sample",
]
