"""Symplectic and spectral primitives shared by every other module.

Quadrature vectors interleave position and momentum as (q1, p1, q2, p2, ...).
The commutation matrix of n quadratures is block diagonal with 2x2 blocks
J = [[0, 1], [-1, 0]], and covariances are scaled so the vacuum state has
unit covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "QuadratureSystem",
    "frobenius_norm",
    "gamma_matrix",
    "is_hurwitz",
    "permutation_matrix",
    "symplectic_form",
]

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])

# Quadrature-to-ladder conversion block used by gamma_matrix.
_LADDER = 0.5 * np.array([[1.0, 1.0j], [1.0, -1.0j]])


def require_even(value, name: str) -> int:
    """Validate a positive even integer dimension and return it as int."""
    try:
        ivalue = int(value)
    except (TypeError, ValueError):
        raise DimensionError(f"{name} must be a positive even integer, got {value!r}")
    if ivalue != value or ivalue <= 0 or ivalue % 2:
        raise DimensionError(f"{name} must be a positive even integer, got {value!r}")
    return ivalue


def as_real_matrix(value, name: str) -> np.ndarray:
    """Coerce to a 2-D float array with finite entries."""
    arr = np.array(value, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D real matrix, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def as_complex_matrix(value, name: str) -> np.ndarray:
    """Coerce to a 2-D complex array with finite entries."""
    arr = np.array(value, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D complex matrix, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def as_real_vector(value, name: str) -> np.ndarray:
    """Coerce to a 1-D float array with finite entries."""
    arr = np.array(value, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a 1-D real vector, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def symplectic_form(n: int) -> np.ndarray:
    """Commutation matrix of n quadratures: block diagonal copies of J2.

    Antisymmetric, orthogonal, and squares to -I.
    """
    n = require_even(n, "n")
    return np.kron(np.eye(n // 2), J2)


def permutation_matrix(m: int) -> np.ndarray:
    """Permutation sending (a1, ..., am) to (a1, a3, ..., a_{m-1}, a2, a4, ..., am)."""
    m = require_even(m, "m")
    P = np.zeros((m, m))
    half = m // 2
    for k in range(half):
        P[k, 2 * k] = 1.0
        P[half + k, 2 * k + 1] = 1.0
    return P


def gamma_matrix(m: int) -> np.ndarray:
    """Quadrature/ladder change-of-basis factor P_m (I ⊗ [[1, i], [1, -i]] / 2).

    Satisfies gamma_matrix(m) @ gamma_matrix(m).conj().T == I/2, so its
    inverse is 2 gamma_matrix(m).conj().T.
    """
    m = require_even(m, "m")
    return permutation_matrix(m) @ np.kron(np.eye(m // 2), _LADDER)


def is_hurwitz(A, margin: float = 1e-9) -> tuple[bool, float]:
    """Whether every eigenvalue of A has real part below -margin.

    Parameters
    ----------
    A : array_like, square
    margin : float
        Stability margin absorbing floating-point drift of the eigensolver.

    Returns
    -------
    (verdict, max_real_part)
    """
    A = as_real_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got shape {A.shape}")
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    max_re = float(np.linalg.eigvals(A).real.max())
    return max_re < -margin, max_re


def frobenius_norm(A) -> float:
    """Square root of the sum of squared (absolute) entries."""
    return float(np.linalg.norm(np.asarray(A)))


def _freeze(obj, name, arr):
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True, eq=False)
class QuadratureSystem:
    """Linear quadrature-space model dx = A x dt + B dw, dy = C x dt + D dw.

    All dimensions are even; D must equal [I 0] exactly, selecting the
    measured field quadratures from the n_w inputs.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = as_real_matrix(self.A, "A")
        B = as_real_matrix(self.B, "B")
        C = as_real_matrix(self.C, "C")
        D = as_real_matrix(self.D, "D")
        n_x = require_even(A.shape[0], "n_x")
        if A.shape != (n_x, n_x):
            raise DimensionError(f"A must be square, got shape {A.shape}")
        n_w = require_even(B.shape[1], "n_w")
        if B.shape != (n_x, n_w):
            raise DimensionError(f"B must be {n_x}x{n_w}, got shape {B.shape}")
        n_y = require_even(C.shape[0], "n_y")
        if C.shape != (n_y, n_x):
            raise DimensionError(f"C must be {n_y}x{n_x}, got shape {C.shape}")
        if n_y > n_w:
            raise DimensionError(f"n_y={n_y} must not exceed n_w={n_w}")
        if D.shape != (n_y, n_w):
            raise DimensionError(f"D must be {n_y}x{n_w}, got shape {D.shape}")
        expected = np.hstack([np.eye(n_y), np.zeros((n_y, n_w - n_y))])
        if not np.array_equal(D, expected):
            raise DimensionError("D must equal [I 0] exactly")
        _freeze(self, "A", A)
        _freeze(self, "B", B)
        _freeze(self, "C", C)
        _freeze(self, "D", D)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_w(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]
