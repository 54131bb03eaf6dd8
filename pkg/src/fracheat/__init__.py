"""Time-fractional stochastic heat equation toolkit.

Computes the Mittag-Leffler solution kernels of the Caputo-in-time heat
equation driven by time-space white noise, Monte-Carlo simulates the random
field on space-time lattices, and classifies/diagnoses square-integrability
(mildness) of the pointwise solution as a function of the fractional order
and the space dimension.
"""

__version__ = "0.1.0"

from .caputo import (
    CaputoOrder,
    caputo_derivative,
    caputo_linear_closed_form,
    caputo_of_ml_kernel,
    ml_ode_residual,
)
from .kernel import (
    EquationSpec,
    KernelField,
    classical_kernel,
    default_spectral_grid,
    i1_field,
    lambda_kernel,
    mass_integral,
)
from .mildness import (
    MildnessVerdict,
    VarianceReport,
    classify,
    closed_form_j2_alpha1,
    divergence_scan,
    j2_exponent,
    spectral_variance,
)
from .specfun import (
    DEFAULT_POLICY,
    EvalPolicy,
    MLOrder,
    erfc_fn,
    gamma_fn,
    gamma_ratio_seq,
    mittag_leffler,
    ml_negative_axis,
    ml_one_param,
    ml_via_spectral_integral,
    spectral_kernel_K,
)
from .stochastic import (
    FieldSample,
    LatticeSpec,
    VarianceEstimate,
    estimate_moments,
    lattice_point_variance,
    sample_brownian_sheet,
    simulate_field,
    white_noise_increments,
)
from .transforms import (
    SpectralGrid,
    gaussian_integral_closed,
    inverse_fourier_field,
    laplace_identity_residual,
    laplace_numeric,
)

__all__ = [name for name in dir() if not name.startswith("_")]
