"""Coherent observer toolkit for linear Gaussian quantum plants.

Checks physical realizability of quadrature-space models, synthesizes
mean-tracking and covariance-tracking coherent observers, propagates the
joint first and second moments of the plant-observer cascade, and evaluates
entanglement (PPT symplectic eigenvalue) and Gaussian fidelity metrics.
A CLI (`cohobs`) exposes the same functionality plus one-shot reproduction
of the three bundled examples.
"""

from .errors import (
    ConfigError,
    DimensionError,
    InfeasibleError,
    InvalidStateError,
    NumericalError,
    RealizabilityError,
    StabilityError,
    ToolkitError,
)
from .gaussian import (
    GaussianState,
    covariance_error_norm,
    fidelity_single_mode,
    ppt_nu_minus,
    symplectic_eigenvalues,
)
from .moments import (
    JointSystem,
    MomentState,
    asymptotic_covariance_gap,
    build_joint_system,
    integrate_joint_moments,
    kernel_backend,
    solve_sylvester,
    steady_state_covariance,
)
from .quadrature import (
    QuadratureSystem,
    frobenius_norm,
    gamma_matrix,
    is_hurwitz,
    permutation_matrix,
    symplectic_form,
)
from .realizability import (
    RealizabilityReport,
    SLHParams,
    abcd_from_slh,
    check_physical_realizability,
    detectability_check,
    recover_slh,
)
from .synthesis import (
    ObserverModel,
    SynthesisReport,
    derive_observer_output,
    gain_grid_search,
    observer_as_system,
    observer_realizability,
    synthesize_covariance_tracking,
    synthesize_mean_tracking,
    validate_gain,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "GaussianState",
    "InfeasibleError",
    "InvalidStateError",
    "JointSystem",
    "MomentState",
    "NumericalError",
    "ObserverModel",
    "QuadratureSystem",
    "RealizabilityError",
    "RealizabilityReport",
    "SLHParams",
    "StabilityError",
    "SynthesisReport",
    "ToolkitError",
    "abcd_from_slh",
    "asymptotic_covariance_gap",
    "build_joint_system",
    "check_physical_realizability",
    "covariance_error_norm",
    "derive_observer_output",
    "detectability_check",
    "fidelity_single_mode",
    "frobenius_norm",
    "gain_grid_search",
    "gamma_matrix",
    "integrate_joint_moments",
    "is_hurwitz",
    "kernel_backend",
    "observer_as_system",
    "observer_realizability",
    "permutation_matrix",
    "ppt_nu_minus",
    "recover_slh",
    "solve_sylvester",
    "steady_state_covariance",
    "symplectic_eigenvalues",
    "symplectic_form",
    "synthesize_covariance_tracking",
    "synthesize_mean_tracking",
    "validate_gain",
]
