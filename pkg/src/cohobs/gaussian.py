"""Gaussian-state analytics used to judge observer tracking quality.

Symplectic spectra, the two-mode PPT entanglement measure, the closed-form
single-mode fidelity, and covariance error norms. Covariances follow the
vacuum = identity scaling; a two-mode state is entangled exactly when the
smallest symplectic eigenvalue of its partial transpose drops below one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidStateError
from .quadrature import as_real_matrix, as_real_vector, frobenius_norm, require_even, symplectic_form

__all__ = [
    "GaussianState",
    "covariance_error_norm",
    "fidelity_single_mode",
    "ppt_nu_minus",
    "symplectic_eigenvalues",
]


def _validated_covariance(sigma, name: str = "sigma", tol: float = 1e-8) -> np.ndarray:
    sigma = as_real_matrix(sigma, name)
    n = sigma.shape[0]
    if sigma.shape != (n, n):
        raise DimensionError(f"{name} must be square, got {sigma.shape}")
    require_even(n, "n")
    defect = frobenius_norm(sigma - sigma.T)
    if defect > tol * (1.0 + frobenius_norm(sigma)):
        raise InvalidStateError(f"{name} must be symmetric (defect {defect:.3e})")
    return 0.5 * (sigma + sigma.T)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Gaussian state (mu, sigma) with vacuum covariance = identity.

    sigma must be symmetric positive semidefinite. Violations of the
    uncertainty bound (sigma + i Theta not PSD) warn by default and raise
    when strict=True, so mid-integration numerical drift does not abort an
    analysis run.
    """

    mu: np.ndarray
    sigma: np.ndarray
    strict: bool = False

    def __post_init__(self):
        mu = as_real_vector(self.mu, "mu")
        sigma = _validated_covariance(self.sigma, "sigma")
        n = sigma.shape[0]
        if mu.shape != (n,):
            raise DimensionError(f"mu must have length {n}, got {mu.shape}")
        scale = 1.0 + frobenius_norm(sigma)
        min_eig = float(np.linalg.eigvalsh(sigma).min())
        if min_eig < -1e-8 * scale:
            raise InvalidStateError(f"sigma must be PSD (min eigenvalue {min_eig:.3e})")
        heis = sigma + 1j * symplectic_form(n)
        min_heis = float(np.linalg.eigvalsh(heis).min())
        if min_heis < -1e-8 * scale:
            message = f"state violates the uncertainty bound (min eigenvalue {min_heis:.3e})"
            if self.strict:
                raise InvalidStateError(message)
            warnings.warn(message, RuntimeWarning, stacklevel=2)
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]


def symplectic_eigenvalues(sigma, tol: float = 1e-8) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, ascending.

    The eigenvalues of i Theta sigma come in +/- pairs; their distinct
    absolute values (n/2 of them) are returned. A vacuum mode contributes 1.
    """
    sigma = _validated_covariance(sigma, "sigma", tol)
    n = sigma.shape[0]
    moduli = np.sort(np.abs(np.linalg.eigvals(symplectic_form(n) @ sigma)))
    return moduli[::2].copy()


def ppt_nu_minus(sigma, tol: float = 1e-8) -> float:
    """Smallest symplectic eigenvalue of the partially transposed two-mode state.

    The state is entangled exactly when the returned value is below 1.
    Computed in closed form from the 2x2 block determinants of the 4x4
    covariance.
    """
    sigma = _validated_covariance(sigma, "sigma", tol)
    if sigma.shape != (4, 4):
        raise DimensionError(f"sigma must be 4x4 (two modes), got {sigma.shape}")
    det_a = float(np.linalg.det(sigma[:2, :2]))
    det_b = float(np.linalg.det(sigma[2:, 2:]))
    det_c = float(np.linalg.det(sigma[:2, 2:]))
    det_full = float(np.linalg.det(sigma))
    delta = det_a + det_b - 2.0 * det_c
    disc = delta * delta - 4.0 * det_full
    if disc < -tol:
        raise InvalidStateError(f"negative discriminant {disc:.3e}: not a valid covariance")
    inner = 0.5 * (delta - np.sqrt(max(disc, 0.0)))
    if inner < -tol:
        raise InvalidStateError(f"negative squared eigenvalue {inner:.3e}: not a valid covariance")
    return float(np.sqrt(max(inner, 0.0)))


def fidelity_single_mode(state1: GaussianState, state2: GaussianState) -> float:
    """Closed-form fidelity between two single-mode Gaussian states.

    Equals 1 exactly when the states coincide, is symmetric in its
    arguments, and decreases as the means separate. In the vacuum = identity
    scaling:

        F = 2 exp(-d^T (S1+S2)^{-1} d / 2) / (sqrt(det(S1+S2) + q) - sqrt(q))

    with q = (det S1 - 1)(det S2 - 1).
    """
    if state1.n != 2 or state2.n != 2:
        raise DimensionError("fidelity is implemented for single-mode states only")
    total = state1.sigma + state2.sigma
    det_total = float(np.linalg.det(total))
    if det_total <= 1e-12:
        raise InvalidStateError("combined covariance is singular")
    d = state1.mu - state2.mu
    exponent = -0.5 * float(d @ np.linalg.solve(total, d))
    aux = (float(np.linalg.det(state1.sigma)) - 1.0) * (float(np.linalg.det(state2.sigma)) - 1.0)
    aux = max(aux, 0.0)  # clip roundoff below the pure-state floor
    denom = np.sqrt(det_total + aux) - np.sqrt(aux)
    fidelity = 2.0 * np.exp(exponent) / denom
    return float(min(max(fidelity, 0.0), 1.0))


def covariance_error_norm(sigma_p, sigma_o) -> float:
    """Frobenius norm of the covariance error sigma_p - sigma_o."""
    sigma_p = as_real_matrix(sigma_p, "sigma_p")
    sigma_o = as_real_matrix(sigma_o, "sigma_o")
    if sigma_p.shape != sigma_o.shape:
        raise DimensionError(
            f"covariances must have equal shapes, got {sigma_p.shape} and {sigma_o.shape}"
        )
    return frobenius_norm(sigma_p - sigma_o)
