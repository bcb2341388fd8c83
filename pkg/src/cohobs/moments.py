"""Joint plant-observer moment dynamics.

Covers the steady-state matrix-equation solvers (Sylvester and Lyapunov),
assembly of the cascaded plant-observer coefficient matrices, fixed-step
integration of the joint first and second moments, and the asymptotic
covariance-gap diagnostic that decides whether any noise choice can make the
observer covariance converge to the plant's.

The integrator's inner loop is provided by a compiled extension when it was
built; otherwise a NumPy fallback with identical semantics is used. The
selected backend is reported by `kernel_backend()`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg

from .errors import DimensionError, InvalidStateError, NumericalError, StabilityError
from .quadrature import (
    QuadratureSystem,
    as_real_matrix,
    as_real_vector,
    frobenius_norm,
    is_hurwitz,
    require_even,
)

if TYPE_CHECKING:  # pragma: no cover
    from .synthesis import ObserverModel

try:
    from . import _rk4_cy as _rk4

    KERNEL_BACKEND = "compiled"
except ImportError:  # extension not built; identical NumPy semantics
    from . import _rk4_py as _rk4

    KERNEL_BACKEND = "numpy"

__all__ = [
    "JointSystem",
    "MomentState",
    "asymptotic_covariance_gap",
    "build_joint_system",
    "integrate_joint_moments",
    "kernel_backend",
    "solve_sylvester",
    "steady_state_covariance",
]


def kernel_backend() -> str:
    """Integrator backend selected at import: "compiled" or "numpy"."""
    return KERNEL_BACKEND


def _check_symmetric(M: np.ndarray, name: str, tol: float = 1e-8) -> np.ndarray:
    defect = frobenius_norm(M - M.T)
    if defect > tol * (1.0 + frobenius_norm(M)):
        raise InvalidStateError(f"{name} must be symmetric (defect {defect:.3e})")
    return 0.5 * (M + M.T)


@dataclass(frozen=True, eq=False)
class MomentState:
    """First and second moments of the cascaded plant-observer pair at time t.

    sigma_p and sigma_o must be symmetric; eigenvalues slightly below zero
    (numerical drift) trigger a warning rather than an error.
    """

    t: float
    mu_p: np.ndarray
    mu_o: np.ndarray
    sigma_p: np.ndarray
    sigma_po: np.ndarray
    sigma_o: np.ndarray

    def __post_init__(self):
        mu_p = as_real_vector(self.mu_p, "mu_p")
        mu_o = as_real_vector(self.mu_o, "mu_o")
        n = require_even(mu_p.shape[0], "n_x")
        if mu_o.shape != (n,):
            raise DimensionError(f"mu_o must have length {n}, got {mu_o.shape}")
        sigma_p = as_real_matrix(self.sigma_p, "sigma_p")
        sigma_po = as_real_matrix(self.sigma_po, "sigma_po")
        sigma_o = as_real_matrix(self.sigma_o, "sigma_o")
        for name, M in (("sigma_p", sigma_p), ("sigma_po", sigma_po), ("sigma_o", sigma_o)):
            if M.shape != (n, n):
                raise DimensionError(f"{name} must be {n}x{n}, got {M.shape}")
        sigma_p = _check_symmetric(sigma_p, "sigma_p")
        sigma_o = _check_symmetric(sigma_o, "sigma_o")
        for name, M in (("sigma_p", sigma_p), ("sigma_o", sigma_o)):
            floor = -1e-8 * (1.0 + frobenius_norm(M))
            min_eig = float(np.linalg.eigvalsh(M).min())
            if min_eig < floor:
                warnings.warn(
                    f"{name} at t={self.t:g} has eigenvalue {min_eig:.3e} below zero",
                    RuntimeWarning,
                    stacklevel=2,
                )
        for name, arr in (
            ("mu_p", mu_p),
            ("mu_o", mu_o),
            ("sigma_p", sigma_p),
            ("sigma_po", sigma_po),
            ("sigma_o", sigma_o),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n_x(self) -> int:
        return self.mu_p.shape[0]


@dataclass(frozen=True, eq=False)
class JointSystem:
    """Coefficient matrices of the cascaded plant-observer pair.

    A is block lower-triangular ([[A_p, 0], [K C_p, A_p - K C_p]]) and B
    stacks the plant noise, the fed-through output noise, and the observer's
    own noise.
    """

    A: np.ndarray
    B: np.ndarray
    n_x: int

    def __post_init__(self):
        A = as_real_matrix(self.A, "A")
        B = as_real_matrix(self.B, "B")
        n_x = require_even(self.n_x, "n_x")
        if A.shape != (2 * n_x, 2 * n_x):
            raise DimensionError(f"A must be {2 * n_x}x{2 * n_x}, got {A.shape}")
        if B.shape[0] != 2 * n_x:
            raise DimensionError(f"B must have {2 * n_x} rows, got {B.shape}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "n_x", n_x)


def solve_sylvester(Acoef, Bcoef, Q, tol: float = 1e-8) -> np.ndarray:
    """Solve Acoef X + X Bcoef + Q = 0 for X.

    The solution is unique exactly when Acoef and -Bcoef share no eigenvalue;
    a near-violation raises with the offending eigenvalue pair. The returned
    X always satisfies ||Acoef X + X Bcoef + Q||_F <= tol (1 + ||Q||_F).
    """
    Acoef = as_real_matrix(Acoef, "Acoef")
    Bcoef = as_real_matrix(Bcoef, "Bcoef")
    Q = as_real_matrix(Q, "Q")
    n, m = Acoef.shape[0], Bcoef.shape[0]
    if Acoef.shape != (n, n) or Bcoef.shape != (m, m):
        raise DimensionError("Acoef and Bcoef must be square")
    if Q.shape != (n, m):
        raise DimensionError(f"Q must be {n}x{m}, got {Q.shape}")
    eig_a = np.linalg.eigvals(Acoef)
    eig_b = np.linalg.eigvals(Bcoef)
    sep = np.abs(eig_a[:, None] + eig_b[None, :])
    scale = max(1.0, float(np.abs(eig_a).max(initial=0.0)), float(np.abs(eig_b).max(initial=0.0)))
    if sep.min() < 1e-12 * scale:
        i, j = np.unravel_index(np.argmin(sep), sep.shape)
        raise NumericalError(
            "no unique solution: eigenvalue "
            f"{eig_a[i]:.6g} of Acoef is (nearly) opposite to {eig_b[j]:.6g} of Bcoef"
        )
    X = scipy.linalg.solve_sylvester(Acoef, Bcoef, -Q)
    residual = frobenius_norm(Acoef @ X + X @ Bcoef + Q)
    if residual > tol * (1.0 + frobenius_norm(Q)):
        raise NumericalError(f"solution residual {residual:.3e} exceeds tolerance")
    return X


def steady_state_covariance(A, N, tol: float = 1e-8) -> np.ndarray:
    """Stationary covariance: the X solving A X + X A^T + N = 0 for Hurwitz A."""
    A = as_real_matrix(A, "A")
    N = as_real_matrix(N, "N")
    n = A.shape[0]
    if A.shape != (n, n) or N.shape != (n, n):
        raise DimensionError("A and N must be square with equal shapes")
    stable, max_re = is_hurwitz(A)
    if not stable:
        raise StabilityError(f"A must be Hurwitz (max eigenvalue real part {max_re:.6g})")
    N = _check_symmetric(N, "N")
    min_eig = float(np.linalg.eigvalsh(N).min())
    if min_eig < -1e-8 * (1.0 + frobenius_norm(N)):
        raise InvalidStateError(f"N must be positive semidefinite (min eigenvalue {min_eig:.3e})")
    X = scipy.linalg.solve_continuous_lyapunov(A, -N)
    X = 0.5 * (X + X.T)
    residual = frobenius_norm(A @ X + X @ A.T + N)
    if residual > tol * (1.0 + frobenius_norm(N)):
        raise NumericalError(f"solution residual {residual:.3e} exceeds tolerance")
    return X


def build_joint_system(plant: QuadratureSystem, obs: "ObserverModel") -> JointSystem:
    """Cascade coefficient matrices for a plant and an observer fed its output."""
    n_x = plant.n_x
    if obs.K.shape != (n_x, plant.n_y):
        raise DimensionError(
            f"K must be {n_x}x{plant.n_y} for this plant, got {obs.K.shape}"
        )
    KC = obs.K @ plant.C
    A_err = plant.A - KC
    A = np.block([[plant.A, np.zeros((n_x, n_x))], [KC, A_err]])
    B = np.block(
        [
            [plant.B, np.zeros((n_x, obs.B_o.shape[1]))],
            [obs.K @ plant.D, obs.B_o],
        ]
    )
    return JointSystem(A=A, B=B, n_x=n_x)


def _moment_state_from_arrays(t: float, mu: np.ndarray, sigma: np.ndarray, n_x: int) -> MomentState:
    return MomentState(
        t=t,
        mu_p=mu[:n_x].copy(),
        mu_o=mu[n_x:].copy(),
        sigma_p=sigma[:n_x, :n_x].copy(),
        sigma_po=sigma[:n_x, n_x:].copy(),
        sigma_o=sigma[n_x:, n_x:].copy(),
    )


def integrate_joint_moments(
    joint: JointSystem,
    init: MomentState,
    t_final: float,
    dt: float = 1e-3,
    sample_stride: int = 1,
) -> list[MomentState]:
    """Propagate the joint moments with fixed-step fourth-order Runge-Kutta.

    The mean obeys mu' = A mu and the joint covariance sigma' = A sigma +
    sigma A^T + B B^T; the covariance is re-symmetrized after every step.
    Returns states at steps {0, sample_stride, 2*sample_stride, ...} plus the
    final step; t_final = 0 returns the initial state only.

    Raises NumericalError with the offending time if the moments become
    non-finite (e.g. the step size is too large for the fastest mode).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_final < 0:
        raise ValueError(f"t_final must be nonnegative, got {t_final}")
    sample_stride = int(sample_stride)
    if sample_stride < 1:
        raise ValueError(f"sample_stride must be a positive integer, got {sample_stride}")
    n_x = joint.n_x
    if init.n_x != n_x:
        raise DimensionError(f"initial state has n_x={init.n_x}, joint system has {n_x}")
    if t_final == 0:
        return [init]
    n_steps = max(1, int(round(t_final / dt)))

    mu0 = np.ascontiguousarray(np.concatenate([init.mu_p, init.mu_o]))
    sigma0 = np.ascontiguousarray(
        np.block([[init.sigma_p, init.sigma_po], [init.sigma_po.T, init.sigma_o]])
    )
    A = np.ascontiguousarray(joint.A).copy()
    noise = np.ascontiguousarray(joint.B @ joint.B.T)

    sample_steps = list(range(0, n_steps + 1, sample_stride))
    if sample_steps[-1] != n_steps:
        sample_steps.append(n_steps)
    n_samples = len(sample_steps)
    out_mu = np.empty((n_samples, 2 * n_x))
    out_sigma = np.empty((n_samples, 2 * n_x, 2 * n_x))

    bad = _rk4.run(A, noise, mu0.copy(), sigma0.copy(), float(dt), n_steps, sample_stride, out_mu, out_sigma)
    if bad >= 0:
        raise NumericalError(
            f"moments diverged (non-finite values at t={sample_steps[bad] * dt:g})"
        )
    return [
        _moment_state_from_arrays(step * dt, out_mu[slot], out_sigma[slot], n_x)
        for slot, step in enumerate(sample_steps)
    ]


def asymptotic_covariance_gap(
    joint: JointSystem,
    probe_values: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5),
    rel_tol: float = 1e-6,
) -> tuple[np.ndarray, bool]:
    """Long-time limit of vec(Sigma_o - Sigma_p) driven by the joint noise.

    A covariance-tracking observer exists for the given gain/noise exactly
    when this limit is zero. When the Lyapunov operator of the joint drift is
    nonsingular the limit is evaluated directly; otherwise the resolvent is
    probed at small shifts and Richardson-extrapolated, and `converged` is
    False when successive extrapolants disagree (e.g. the gap diverges
    because an undamped plant mode keeps accumulating noise).

    Returns (gap vector of length n_x**2, converged flag).
    """
    n_x = joint.n_x
    two = 2 * n_x
    eye = np.eye(two)
    lyap_op = np.kron(eye, joint.A) + np.kron(joint.A, eye)
    noise_vec = (joint.B @ joint.B.T).ravel(order="F")
    E_p = np.hstack([np.eye(n_x), np.zeros((n_x, n_x))])
    E_o = np.hstack([np.zeros((n_x, n_x)), np.eye(n_x)])
    selector = np.kron(E_o, E_o) - np.kron(E_p, E_p)

    singular_values = np.linalg.svd(lyap_op, compute_uv=False)
    if singular_values.min() > 1e-10 * singular_values.max():
        gap = selector @ np.linalg.solve(-lyap_op, noise_vec)
        return gap, True

    big_eye = np.eye(lyap_op.shape[0])
    samples = []
    for s in probe_values:
        try:
            x = np.linalg.solve(s * big_eye - lyap_op, noise_vec)
        except np.linalg.LinAlgError:
            continue
        samples.append((s, selector @ x))
    if not samples:
        raise NumericalError("resolvent solve failed at every probe point")
    if len(samples) == 1:
        return samples[0][1], False
    extrapolants = []
    for (s1, g1), (s2, g2) in zip(samples[:-1], samples[1:]):
        extrapolants.append((s1 * g2 - s2 * g1) / (s1 - s2))
    if len(extrapolants) < 2:
        return extrapolants[-1], False
    diff = float(np.linalg.norm(extrapolants[-1] - extrapolants[-2]))
    converged = diff <= rel_tol * (1.0 + float(np.linalg.norm(extrapolants[-1])))
    return extrapolants[-1], converged
