"""Model order reduction toolkit with a relative-error H2 criterion.

Dense Sylvester/Lyapunov/Riccati kernels (:mod:`relmor.linalg`),
state-space realization algebra and norms (:mod:`relmor.sstools`), the
multiplicative error system with its gramians and gradients
(:mod:`relmor.relerr`), the reduction algorithms (:mod:`relmor.algorithms`),
and a comparison harness with a CLI (:mod:`relmor.bench`, :mod:`relmor.cli`).
"""

from .algorithms import (
    IterationTrace,
    ReductionConfig,
    balanced_stochastic_truncation,
    balanced_truncation,
    biorthogonalize,
    irhmora,
    relative_error_h2_weighted,
    tsia,
)
from .linalg import SpectrumSummary, eigenvalues, solve_care, solve_lyapunov, solve_sylvester
from .modelio import load_model, save_model
from .relerr import (
    ErrorSystemGramians,
    GradientBundle,
    RomCandidate,
    build_delta_mul,
    compute_gramians,
    delta_mul_norm,
    deviations,
    gradients,
    h2_norm_delta_mul,
)
from .sstools import (
    StateSpace,
    conjugate_inverse_of_factor,
    frequency_response,
    h2_norm,
    hinf_norm,
    inverse_realization,
    regularize_d,
    relative_error_weight,
    series,
    spectral_factor,
    subtract,
    zeros,
)

__version__ = "0.1.0"

__all__ = [
    "StateSpace",
    "SpectrumSummary",
    "RomCandidate",
    "ErrorSystemGramians",
    "GradientBundle",
    "IterationTrace",
    "ReductionConfig",
    "eigenvalues",
    "solve_sylvester",
    "solve_lyapunov",
    "solve_care",
    "regularize_d",
    "inverse_realization",
    "zeros",
    "spectral_factor",
    "conjugate_inverse_of_factor",
    "relative_error_weight",
    "h2_norm",
    "hinf_norm",
    "frequency_response",
    "series",
    "subtract",
    "build_delta_mul",
    "compute_gramians",
    "h2_norm_delta_mul",
    "gradients",
    "deviations",
    "delta_mul_norm",
    "biorthogonalize",
    "balanced_truncation",
    "balanced_stochastic_truncation",
    "tsia",
    "irhmora",
    "relative_error_h2_weighted",
    "load_model",
    "save_model",
    "__version__",
]
