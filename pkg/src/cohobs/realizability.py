"""Conversions between Hamiltonian/coupling parameters and quadrature-space
models, plus the physical realizability and detectability checks.

An open harmonic oscillator is specified by a symmetric Hamiltonian matrix R
(H = x^T R x / 2) and a complex coupling matrix Lam (L = Lam x, one row per
field mode). The forward map builds the (A, B, C, D) quadruple realized by
those parameters; `recover_slh` inverts it, and `check_physical_realizability`
verifies the two algebraic identities a quadruple must satisfy to preserve
the canonical commutation relations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError, RealizabilityError
from .quadrature import (
    QuadratureSystem,
    as_complex_matrix,
    as_real_matrix,
    frobenius_norm,
    gamma_matrix,
    permutation_matrix,
    require_even,
    symplectic_form,
)

__all__ = [
    "SLHParams",
    "RealizabilityReport",
    "abcd_from_slh",
    "check_physical_realizability",
    "detectability_check",
    "recover_slh",
]


@dataclass(frozen=True, eq=False)
class SLHParams:
    """Hamiltonian matrix R and coupling matrix Lam of an open oscillator."""

    R: np.ndarray
    Lam: np.ndarray

    def __post_init__(self):
        R = as_real_matrix(self.R, "R")
        Lam = as_complex_matrix(self.Lam, "Lam")
        n = require_even(R.shape[0], "n")
        if R.shape != (n, n):
            raise DimensionError(f"R must be square, got shape {R.shape}")
        defect = frobenius_norm(R - R.T)
        if defect > 1e-8 * (1.0 + frobenius_norm(R)):
            raise RealizabilityError(f"R must be symmetric (defect {defect:.3e})")
        if Lam.shape[1] != n:
            raise DimensionError(f"Lam must have {n} columns, got shape {Lam.shape}")
        R = 0.5 * (R + R.T)
        R.setflags(write=False)
        Lam.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "Lam", Lam)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def n_w(self) -> int:
        return 2 * self.Lam.shape[0]


@dataclass(frozen=True)
class RealizabilityReport:
    """Frobenius residuals of the two realizability identities."""

    passed: bool
    residual_a: float
    residual_b: float
    tol: float


def _output_matrix(Lam: np.ndarray, n_y: int, n_w: int) -> np.ndarray:
    # Rows interleave 2 Re and 2 Im of the measured coupling rows.
    half_y = n_y // 2
    sel = np.hstack([np.eye(half_y), np.zeros((half_y, (n_w - n_y) // 2))])
    stacked = np.vstack([sel @ (2.0 * Lam.real), sel @ (2.0 * Lam.imag)])
    return permutation_matrix(n_y).T @ stacked


def abcd_from_slh(slh: SLHParams, n_y: int) -> QuadratureSystem:
    """Quadrature-space model realized by Hamiltonian matrix R and coupling Lam.

    The first n_y of the n_w input quadratures are measured (D = [I 0]);
    the output always satisfies the physical realizability identities.
    """
    n_y = require_even(n_y, "n_y")
    n, n_w = slh.n, slh.n_w
    if n_y > n_w:
        raise DimensionError(f"n_y={n_y} must not exceed n_w={n_w}")
    theta = symplectic_form(n)
    Lam = slh.Lam
    gram = Lam.conj().T @ Lam
    A = 2.0 * theta @ (slh.R + gram.imag)
    B_c = 2j * theta @ np.hstack([-Lam.conj().T, Lam.T]) @ gamma_matrix(n_w)
    imag_residue = float(np.abs(B_c.imag).max()) if B_c.size else 0.0
    if imag_residue > 1e-10 * (1.0 + float(np.abs(B_c).max())):
        raise NumericalError(f"noise matrix has imaginary residue {imag_residue:.3e}")
    B = B_c.real.copy()
    C = _output_matrix(Lam, n_y, n_w)
    D = np.hstack([np.eye(n_y), np.zeros((n_y, n_w - n_y))])
    return QuadratureSystem(A=A, B=B, C=C, D=D)


def check_physical_realizability(sys: QuadratureSystem, tol: float = 1e-8) -> RealizabilityReport:
    """Residuals of the two commutation-preservation identities.

    residual_a: ||A Theta + Theta A^T + B Theta_w B^T||_F
    residual_b: ||B D^T - Theta C^T Theta_y||_F
    """
    theta_x = symplectic_form(sys.n_x)
    theta_w = symplectic_form(sys.n_w)
    theta_y = symplectic_form(sys.n_y)
    res_a = frobenius_norm(sys.A @ theta_x + theta_x @ sys.A.T + sys.B @ theta_w @ sys.B.T)
    res_b = frobenius_norm(sys.B @ sys.D.T - theta_x @ sys.C.T @ theta_y)
    return RealizabilityReport(
        passed=bool(res_a <= tol and res_b <= tol),
        residual_a=res_a,
        residual_b=res_b,
        tol=float(tol),
    )


def recover_slh(sys: QuadratureSystem, tol: float = 1e-8) -> SLHParams:
    """Invert `abcd_from_slh`: read the coupling off B and the Hamiltonian off A.

    The noise matrix determines every coupling row (including unmeasured
    channels); the output matrix and the antisymmetric part of -Theta A / 2
    are then consistency checks, and a mismatch means the system is not an
    open oscillator.
    """
    n, n_w = sys.n_x, sys.n_w
    theta = symplectic_form(n)
    # B = 2i Theta [-Lam^dag, Lam^T] Gamma inverts via Gamma^{-1} = 2 Gamma^dag.
    X = 1j * theta @ sys.B @ gamma_matrix(n_w).conj().T
    Lam = X[:, n_w // 2 :].T.copy()

    S = -0.5 * theta @ sys.A
    R = 0.5 * (S + S.T)
    antisym = 0.5 * (S - S.T)
    gram_im = (Lam.conj().T @ Lam).imag
    res_dyn = frobenius_norm(antisym - gram_im)
    if res_dyn > tol * (1.0 + frobenius_norm(sys.A)):
        raise RealizabilityError(
            f"drift matrix inconsistent with recovered coupling (residual {res_dyn:.3e})"
        )
    C_expected = _output_matrix(Lam, sys.n_y, n_w)
    res_out = frobenius_norm(C_expected - sys.C)
    if res_out > tol * (1.0 + frobenius_norm(sys.C)):
        raise RealizabilityError(
            f"output matrix inconsistent with any coupling (residual {res_out:.3e})"
        )
    return SLHParams(R=R, Lam=Lam)


def detectability_check(A, C, margin: float = 1e-9) -> bool:
    """Rank test: every eigenvalue of A with Re >= -margin must be observable.

    For each such eigenvalue lambda, [lambda I - A; C] must have full column
    rank; stable modes are exempt.
    """
    A = as_real_matrix(A, "A")
    C = as_real_matrix(C, "C")
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionError(f"A must be square, got shape {A.shape}")
    if C.shape[1] != n:
        raise DimensionError(f"C must have {n} columns, got shape {C.shape}")
    eigenvalues = np.linalg.eigvals(A)
    for lam in eigenvalues:
        if lam.real >= -margin:
            pencil = np.vstack([lam * np.eye(n) - A, C.astype(complex)])
            if np.linalg.matrix_rank(pencil) < n:
                return False
    return True
