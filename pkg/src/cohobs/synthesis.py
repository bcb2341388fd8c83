"""Mean-tracking and covariance-tracking observer construction.

An observer here is a second open oscillator driven by the plant's output
field: its drift is A_p - K C_p for a chosen gain K, and its own vacuum
inputs enter through a noise matrix B_o chosen so the observer is itself a
physically realizable oscillator. A mean-tracking design only needs the
error dynamics Hurwitz plus any realizable B_o; a covariance-tracking design
additionally forces the observer's steady-state covariance to coincide with
the plant's, which pins down B_o B_o^T and is not always achievable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    InfeasibleError,
    NumericalError,
    RealizabilityError,
    StabilityError,
)
from .moments import solve_sylvester
from .quadrature import (
    QuadratureSystem,
    as_complex_matrix,
    as_real_matrix,
    frobenius_norm,
    gamma_matrix,
    is_hurwitz,
    require_even,
    symplectic_form,
)
from .realizability import RealizabilityReport, check_physical_realizability

__all__ = [
    "ObserverModel",
    "SynthesisReport",
    "derive_observer_output",
    "gain_grid_search",
    "observer_as_system",
    "observer_realizability",
    "synthesize_covariance_tracking",
    "synthesize_mean_tracking",
    "validate_gain",
]


def _noise_matrix_from_coupling(Lam_o: np.ndarray, n_x: int) -> np.ndarray:
    """Real noise matrix realized by a complex coupling matrix (one row per mode)."""
    n_wo = 2 * Lam_o.shape[0]
    if n_wo == 0:
        return np.zeros((n_x, 0))
    theta = symplectic_form(n_x)
    B_c = 2j * theta @ np.hstack([-Lam_o.conj().T, Lam_o.T]) @ gamma_matrix(n_wo)
    residue = float(np.abs(B_c.imag).max())
    if residue > 1e-10 * (1.0 + float(np.abs(B_c).max())):
        raise NumericalError(f"noise matrix has imaginary residue {residue:.3e}")
    return B_c.real.copy()


@dataclass(frozen=True, eq=False)
class ObserverModel:
    """Cascaded coherent observer: gain K, noise matrix B_o, output pair (C_o, D_o).

    Lambda_o, when present, is the coupling matrix realizing B_o; it is kept
    so synthesis artifacts can be serialized and audited. B_o may have zero
    columns when no extra noise is needed.
    """

    K: np.ndarray
    B_o: np.ndarray
    C_o: np.ndarray
    D_o: np.ndarray
    Lambda_o: np.ndarray | None = None

    def __post_init__(self):
        K = as_real_matrix(self.K, "K")
        B_o = as_real_matrix(self.B_o, "B_o")
        C_o = as_real_matrix(self.C_o, "C_o")
        D_o = as_real_matrix(self.D_o, "D_o")
        n_x = require_even(K.shape[0], "n_x")
        n_yp = require_even(K.shape[1], "n_yp")
        if B_o.shape[0] != n_x:
            raise DimensionError(f"B_o must have {n_x} rows, got {B_o.shape}")
        n_wo = B_o.shape[1]
        if n_wo % 2:
            raise DimensionError(f"B_o must have an even number of columns, got {n_wo}")
        n_yo = require_even(C_o.shape[0], "n_yo")
        if C_o.shape != (n_yo, n_x):
            raise DimensionError(f"C_o must be {n_yo}x{n_x}, got {C_o.shape}")
        if n_yo > n_yp + n_wo:
            raise DimensionError(f"n_yo={n_yo} exceeds total input width {n_yp + n_wo}")
        expected = np.hstack([np.eye(n_yo), np.zeros((n_yo, n_yp + n_wo - n_yo))])
        if D_o.shape != expected.shape or not np.array_equal(D_o, expected):
            raise DimensionError("D_o must equal [I 0] exactly")
        Lam = self.Lambda_o
        if Lam is not None:
            Lam = as_complex_matrix(Lam, "Lambda_o")
            if Lam.shape != (n_wo // 2, n_x):
                raise DimensionError(
                    f"Lambda_o must be {n_wo // 2}x{n_x}, got {Lam.shape}"
                )
            rebuilt = _noise_matrix_from_coupling(Lam, n_x)
            defect = frobenius_norm(B_o - rebuilt)
            if defect > 1e-8 * (1.0 + frobenius_norm(B_o)):
                raise RealizabilityError(
                    f"B_o inconsistent with Lambda_o (defect {defect:.3e})"
                )
            Lam.setflags(write=False)
        for name, arr in (("K", K), ("B_o", B_o), ("C_o", C_o), ("D_o", D_o)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "Lambda_o", Lam)

    @property
    def n_x(self) -> int:
        return self.K.shape[0]

    @property
    def n_yp(self) -> int:
        return self.K.shape[1]

    @property
    def n_wo(self) -> int:
        return self.B_o.shape[1]

    @property
    def n_yo(self) -> int:
        return self.C_o.shape[0]


@dataclass(frozen=True, eq=False)
class SynthesisReport:
    """Feasibility verdict plus the residuals and diagnostics behind it.

    hurwitz_margin is -max(Re eig(A_p - K C_p)): positive means the error
    dynamics are stable, and larger is faster. For covariance tracking,
    psd_min_eigenvalue is the smallest eigenvalue of the Hermitian coupling
    Gram matrix (negative beyond tolerance means infeasible), sigma_gap is
    the steady-state Sigma_p - Sigma_po, and noise_gram_required is the
    B_o B_o^T the design would need.
    """

    mode: str
    feasible: bool
    hurwitz_margin: float
    psd_min_eigenvalue: float | None = None
    sigma_gap: np.ndarray | None = None
    noise_gram_required: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)
    reason: str | None = None


def observer_as_system(plant: QuadratureSystem, obs: ObserverModel) -> QuadratureSystem:
    """The observer viewed as an open oscillator driven by (plant output, own noise)."""
    if obs.K.shape != (plant.n_x, plant.n_y):
        raise DimensionError(
            f"K must be {plant.n_x}x{plant.n_y} for this plant, got {obs.K.shape}"
        )
    A_err = plant.A - obs.K @ plant.C
    return QuadratureSystem(
        A=A_err,
        B=np.hstack([obs.K, obs.B_o]),
        C=obs.C_o,
        D=obs.D_o,
    )


def observer_realizability(
    plant: QuadratureSystem, obs: ObserverModel, tol: float = 1e-8
) -> RealizabilityReport:
    """Realizability residuals of the observer's own quadruple."""
    return check_physical_realizability(observer_as_system(plant, obs), tol)


def validate_gain(plant: QuadratureSystem, K) -> tuple[np.ndarray, bool]:
    """Error-dynamics matrix A_p - K C_p and whether it is Hurwitz."""
    K = as_real_matrix(K, "K")
    if K.shape != (plant.n_x, plant.n_y):
        raise DimensionError(
            f"K must be {plant.n_x}x{plant.n_y} for this plant, got {K.shape}"
        )
    A_err = plant.A - K @ plant.C
    hurwitz, _ = is_hurwitz(A_err)
    return A_err, hurwitz


def derive_observer_output(K, B_o, n_yo: int) -> tuple[np.ndarray, np.ndarray]:
    """Output pair (C_o, D_o) solving the output realizability identity.

    D_o = [I 0] selects the first n_yo input quadratures, and C_o is the
    unique matrix with [K B_o] D_o^T = Theta C_o^T Theta_yo.
    """
    K = as_real_matrix(K, "K")
    B_o = as_real_matrix(B_o, "B_o")
    n_yo = require_even(n_yo, "n_yo")
    if B_o.shape[0] != K.shape[0]:
        raise DimensionError("K and B_o must have the same number of rows")
    n_x = require_even(K.shape[0], "n_x")
    width = K.shape[1] + B_o.shape[1]
    if n_yo > width:
        raise DimensionError(f"n_yo={n_yo} exceeds total input width {width}")
    D_o = np.hstack([np.eye(n_yo), np.zeros((n_yo, width - n_yo))])
    KB = np.hstack([K, B_o])
    C_o = (symplectic_form(n_x) @ (KB @ D_o.T) @ symplectic_form(n_yo)).T
    return C_o, D_o


def _factor_antisymmetric(Z: np.ndarray, drop_tol: float = 1e-10) -> np.ndarray:
    """Real factor F with F Theta F^T = Z for antisymmetric Z.

    Built from the real Schur form, which for an antisymmetric matrix is
    block diagonal with 2x2 rotation generators; each nonzero block
    contributes one column pair, and blocks below drop_tol (relative) are
    omitted, shrinking the noise width.
    """
    n = Z.shape[0]
    scale = max(1.0, frobenius_norm(Z))
    T, U = scipy.linalg.schur(Z, output="real")
    cols = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i, i + 1]) > drop_tol * scale:
            beta = T[i, i + 1]
            cols.append(U[:, i : i + 2] @ np.diag([1.0, beta]))
            i += 2
        else:
            i += 1
    if cols:
        return np.hstack(cols)
    return np.zeros((n, 0))


def _commutation_noise_target(plant, K, A_err):
    theta = symplectic_form(plant.n_x)
    theta_y = symplectic_form(plant.n_y)
    return -(A_err @ theta + theta @ A_err.T) - K @ theta_y @ K.T


def synthesize_mean_tracking(
    plant: QuadratureSystem, K, n_yo: int | None = None, tol: float = 1e-8
) -> ObserverModel:
    """Observer whose first moments converge to the plant's.

    Requires A_p - K C_p Hurwitz; B_o is any real matrix reproducing the
    antisymmetric noise target forced by realizability, built here with the
    minimal number of noise channels. B_o ends up empty when the gain alone
    already preserves the commutation relations.
    """
    K = as_real_matrix(K, "K")
    A_err, hurwitz = validate_gain(plant, K)
    if not hurwitz:
        raise InfeasibleError("gain does not make the error dynamics Hurwitz")
    Z = _commutation_noise_target(plant, K, A_err)
    Z = 0.5 * (Z - Z.T)
    B_o = _factor_antisymmetric(Z)
    theta_wo = symplectic_form(B_o.shape[1]) if B_o.shape[1] else np.zeros((0, 0))
    residual = frobenius_norm(B_o @ theta_wo @ B_o.T - Z)
    if residual > 1e-10 * (1.0 + frobenius_norm(Z)):
        raise NumericalError(f"noise factorization residual {residual:.3e}")
    C_o, D_o = derive_observer_output(K, B_o, plant.n_y if n_yo is None else n_yo)
    return ObserverModel(K=K, B_o=B_o, C_o=C_o, D_o=D_o)


def _coupling_gram(A_err, K, KC, sigma_gap, BBt, theta, theta_y):
    """Hermitian matrix that must equal Lambda_o^dag Lambda_o for a
    covariance-tracking design; positive semidefiniteness is the feasibility
    test."""
    im_part = theta @ A_err + A_err.T @ theta - theta @ K @ theta_y @ K.T @ theta
    re_part = theta @ (KC @ sigma_gap + sigma_gap.T @ KC.T + BBt - K @ K.T) @ theta
    return -0.25j * im_part - 0.25 * re_part


def synthesize_covariance_tracking(
    plant: QuadratureSystem,
    K,
    n_yo: int | None = None,
    tol: float = 1e-8,
    psd_tol: float = 1e-8,
) -> tuple[ObserverModel | None, SynthesisReport]:
    """Observer tracking both the plant's first moments and its covariance.

    Requires the plant realizable with A_p Hurwitz (so steady states exist)
    and A_p - K C_p Hurwitz. The steady-state Sigma_p - Sigma_po comes from a
    Sylvester equation; feasibility is decided by positive semidefiniteness
    of the Hermitian coupling Gram matrix, whose factorization (eigenvalues
    within psd_tol of zero clipped, relative rank cut 1e-10) yields
    Lambda_o, the noise matrix B_o, and the output pair. Returns
    (observer, report); the observer is None when the design is infeasible,
    with the report carrying the diagnostic B_o B_o^T target.
    """
    K = as_real_matrix(K, "K")
    plant_rep = check_physical_realizability(plant, tol)
    if not plant_rep.passed:
        raise RealizabilityError(
            "plant fails physical realizability "
            f"(residuals {plant_rep.residual_a:.3e}, {plant_rep.residual_b:.3e})"
        )
    stable, max_re_p = is_hurwitz(plant.A)
    if not stable:
        raise StabilityError(
            f"plant drift must be Hurwitz (max eigenvalue real part {max_re_p:.6g}); "
            "use asymptotic_covariance_gap to test such plants"
        )
    A_err, hurwitz = validate_gain(plant, K)
    margin = -float(np.linalg.eigvals(A_err).real.max())
    if not hurwitz:
        report = SynthesisReport(
            mode="cmt",
            feasible=False,
            hurwitz_margin=margin,
            reason="gain does not make the error dynamics Hurwitz",
        )
        return None, report

    Q = plant.B @ plant.B.T - plant.B @ plant.D.T @ K.T
    sigma_gap = solve_sylvester(plant.A, A_err.T, Q, tol)
    sylvester_res = frobenius_norm(plant.A @ sigma_gap + sigma_gap @ A_err.T + Q)

    theta = symplectic_form(plant.n_x)
    theta_y = symplectic_form(plant.n_y)
    KC = K @ plant.C
    BBt = plant.B @ plant.B.T
    required = KC @ sigma_gap + sigma_gap.T @ KC.T + BBt - K @ K.T
    gram = _coupling_gram(A_err, K, KC, sigma_gap, BBt, theta, theta_y)
    herm_res = frobenius_norm(gram - gram.conj().T)
    if herm_res > tol * (1.0 + frobenius_norm(gram)):
        raise NumericalError(f"coupling Gram matrix not Hermitian (defect {herm_res:.3e})")
    gram = 0.5 * (gram + gram.conj().T)
    evals, evecs = np.linalg.eigh(gram)
    min_eig = float(evals.min())
    residuals = {"hermiticity": herm_res, "sylvester": sylvester_res}
    if min_eig < -psd_tol:
        report = SynthesisReport(
            mode="cmt",
            feasible=False,
            hurwitz_margin=margin,
            psd_min_eigenvalue=min_eig,
            sigma_gap=sigma_gap,
            noise_gram_required=required,
            residuals=residuals,
            reason="required noise covariance is not positive semidefinite",
        )
        return None, report

    evals = np.clip(evals, 0.0, None)
    max_eig = float(evals.max()) if evals.size else 0.0
    order = np.argsort(evals)[::-1]
    rows = [
        np.sqrt(evals[i]) * evecs[:, i].conj()
        for i in order
        if max_eig > 0.0 and evals[i] > 1e-10 * max_eig
    ]
    Lambda_o = np.vstack(rows) if rows else np.zeros((0, plant.n_x), dtype=complex)
    B_o = _noise_matrix_from_coupling(Lambda_o, plant.n_x)

    gram_res = frobenius_norm(B_o @ B_o.T - required)
    comm_target = _commutation_noise_target(plant, K, A_err)
    theta_wo = symplectic_form(B_o.shape[1]) if B_o.shape[1] else np.zeros((0, 0))
    comm_res = frobenius_norm(B_o @ theta_wo @ B_o.T - comm_target)
    if gram_res > 1e-6 * (1.0 + frobenius_norm(required)):
        raise NumericalError(f"noise covariance mismatch {gram_res:.3e}")
    if comm_res > 1e-6 * (1.0 + frobenius_norm(comm_target)):
        raise NumericalError(f"noise commutation mismatch {comm_res:.3e}")

    C_o, D_o = derive_observer_output(K, B_o, plant.n_y if n_yo is None else n_yo)
    obs = ObserverModel(K=K, B_o=B_o, C_o=C_o, D_o=D_o, Lambda_o=Lambda_o)
    obs_rep = observer_realizability(plant, obs, tol)
    residuals.update(
        {
            "noise_gram": gram_res,
            "noise_commutation": comm_res,
            "realizability_a": obs_rep.residual_a,
            "realizability_b": obs_rep.residual_b,
        }
    )
    report = SynthesisReport(
        mode="cmt",
        feasible=True,
        hurwitz_margin=margin,
        psd_min_eigenvalue=min_eig,
        sigma_gap=sigma_gap,
        noise_gram_required=required,
        residuals=residuals,
    )
    return obs, report


def gain_grid_search(
    plant: QuadratureSystem,
    candidates,
    n_yo: int | None = None,
    tol: float = 1e-8,
    psd_tol: float = 1e-8,
) -> list[tuple[np.ndarray, SynthesisReport]]:
    """Run covariance-tracking synthesis over candidate gains.

    Returns (gain, report) pairs sorted by decreasing stability margin.
    Candidates for which the plant-level precondition fails (drift not
    Hurwitz) get an infeasible report rather than raising, so a whole grid
    can be scanned on such plants.
    """
    results = []
    for K in candidates:
        K = as_real_matrix(K, "K")
        try:
            _, report = synthesize_covariance_tracking(plant, K, n_yo, tol, psd_tol)
        except StabilityError as exc:
            A_err, _ = validate_gain(plant, K)
            margin = -float(np.linalg.eigvals(A_err).real.max())
            report = SynthesisReport(
                mode="cmt", feasible=False, hurwitz_margin=margin, reason=str(exc)
            )
        results.append((K, report))
    results.sort(key=lambda pair: -pair[1].hurwitz_margin)
    return results
