"""Independent oracles used by the tests.

These deliberately take different computational routes than the library:
Kronecker-vectorized linear solves for the matrix equations, matrix
exponentials for the moment ODEs, a truncated number-basis density-matrix
construction for fidelity, and a plain linear-prediction + least-squares fit
for exponential rates.
"""

import numpy as np
import scipy.linalg
import scipy.optimize

import cohobs as ch


def sylvester_kron(A, B, Q):
    """Solve A X + X B + Q = 0 by vectorizing to a dense linear system."""
    n, m = A.shape[0], B.shape[0]
    M = np.kron(np.eye(m), A) + np.kron(B.T, np.eye(n))
    x = np.linalg.solve(M, -Q.ravel(order="F"))
    return x.reshape((n, m), order="F")


def exact_mean(A, mu0, t):
    return scipy.linalg.expm(A * t) @ mu0


def exact_covariance(A, N, sigma0, t):
    """Closed-form solution of sigma' = A sigma + sigma A^T + N (A Hurwitz)."""
    n = A.shape[0]
    M = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    v = N.ravel(order="F")
    offset = np.linalg.solve(M, v)
    x0 = sigma0.ravel(order="F")
    x = scipy.linalg.expm(M * t) @ (x0 + offset) - offset
    return x.reshape((n, n), order="F")


def nu_minus_partial_transpose(sigma):
    """Smallest symplectic eigenvalue after flipping the second mode's momentum."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return float(ch.symplectic_eigenvalues(flip @ sigma @ flip)[0])


def random_symplectic(rng, n):
    """Random symplectic matrix from a symmetric generator."""
    H = rng.normal(scale=0.3, size=(n, n))
    H = 0.5 * (H + H.T)
    return scipy.linalg.expm(ch.symplectic_form(n) @ H)


def random_valid_two_mode_covariance(rng):
    """4x4 covariance obeying the uncertainty bound (identity plus a Gram term)."""
    W = rng.normal(scale=0.7, size=(4, 4))
    return np.eye(4) + W @ W.T


def random_slh(rng, n=2, n_w=2, scale=0.5):
    R = rng.normal(scale=scale, size=(n, n))
    R = 0.5 * (R + R.T)
    Lam = (rng.normal(size=(n_w // 2, n)) + 1j * rng.normal(size=(n_w // 2, n))) * scale
    return ch.SLHParams(R=R, Lam=Lam)


def random_feasible_tracking_instance(rng):
    """Random realizable plant with stable drift plus a gain for which
    covariance tracking is feasible; rate bounds keep horizons short."""
    for _ in range(500):
        n_w = int(rng.choice([2, 4]))
        slh = random_slh(rng, n=2, n_w=n_w)
        n_y = 2 if n_w == 2 else int(rng.choice([2, 4]))
        try:
            plant = ch.abcd_from_slh(slh, n_y=n_y)
        except ch.ToolkitError:
            continue
        stable, max_re = ch.is_hurwitz(plant.A)
        if not stable or max_re > -0.4 or np.abs(np.linalg.eigvals(plant.A)).max() > 8:
            continue
        for gain_scale in (0.5, 0.25, 0.1, 0.05):
            K = gain_scale * rng.normal(size=(2, n_y))
            try:
                obs, report = ch.synthesize_covariance_tracking(plant, K)
            except ch.ToolkitError:
                continue
            if obs is None or report.hurwitz_margin < 0.4:
                continue
            if np.abs(np.linalg.eigvals(plant.A - K @ plant.C)).max() > 8:
                continue
            return plant, K, obs, report
    raise AssertionError("no feasible instance found; loosen the generator bounds")


def fit_two_exponentials(t, y):
    """Least-squares fit y(t) = c1 exp(r1 t) + c2 exp(r2 t) on a uniform grid.

    Linear prediction (Prony) provides the initial rates, then a nonlinear
    least-squares polish refines all four parameters. Returns
    ((c_slow, r_slow), (c_fast, r_fast)) with r_slow > r_fast.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    step = t[1] - t[0]
    assert np.allclose(np.diff(t), step), "fit requires a uniform grid"
    design = np.column_stack([y[1:-1], y[:-2]])
    (a1, a0), *_ = np.linalg.lstsq(design, y[2:], rcond=None)
    roots = np.roots([1.0, -a1, -a0])
    roots = np.clip(roots.real, 1e-12, None)
    rates = np.log(roots) / step
    basis = np.exp(np.outer(t, rates))
    coeffs, *_ = np.linalg.lstsq(basis, y, rcond=None)

    def residual(params):
        c1, c2, r1, r2 = params
        return c1 * np.exp(r1 * t) + c2 * np.exp(r2 * t) - y

    fit = scipy.optimize.least_squares(residual, [coeffs[0], coeffs[1], rates[0], rates[1]])
    c1, c2, r1, r2 = fit.x
    if r1 < r2:
        c1, c2, r1, r2 = c2, c1, r2, r1
    return (float(c1), float(r1)), (float(c2), float(r2))


# ---------------------------------------------------------------------------
# Truncated number-basis oracle for the Gaussian fidelity formula.

def _ladder(dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    return a, a.conj().T


def gaussian_density_matrix(mu, sigma, dim=80):
    """Density matrix of the single-mode Gaussian state (mu, sigma).

    Built as displaced/rotated/squeezed thermal state in a truncated number
    basis (q = a + a^dag convention, vacuum covariance = identity); the
    constructed moments are verified against the request before returning.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    evals, vecs = np.linalg.eigh(sigma)
    if np.linalg.det(vecs) < 0:
        vecs = vecs[:, ::-1]
        evals = evals[::-1]
    s1, s2 = evals
    theta = np.arctan2(vecs[1, 0], vecs[0, 0])
    nu = np.sqrt(s1 * s2)
    nbar = max((nu - 1.0) / 2.0, 0.0)
    r = 0.25 * np.log(s2 / s1)

    a, adag = _ladder(dim)
    if nbar > 0:
        weights = np.exp(np.arange(dim) * np.log(nbar / (1.0 + nbar)))
        rho = np.diag(weights / weights.sum()).astype(complex)
    else:
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
    squeeze = scipy.linalg.expm(0.5 * r * (a @ a - adag @ adag))
    rho = squeeze @ rho @ squeeze.conj().T
    rotate = scipy.linalg.expm(1j * theta * (adag @ a))
    rho = rotate @ rho @ rotate.conj().T
    alpha = 0.5 * (mu[0] + 1j * mu[1])
    displace = scipy.linalg.expm(alpha * adag - np.conj(alpha) * a)
    rho = displace @ rho @ displace.conj().T

    q = a + adag
    p = -1j * (a - adag)
    mean_q = np.trace(rho @ q).real
    mean_p = np.trace(rho @ p).real
    var_q = np.trace(rho @ q @ q).real - mean_q**2
    var_p = np.trace(rho @ p @ p).real - mean_p**2
    cov_qp = 0.5 * np.trace(rho @ (q @ p + p @ q)).real - mean_q * mean_p
    built = np.array([[var_q, cov_qp], [cov_qp, var_p]])
    assert abs(mean_q - mu[0]) < 1e-6 and abs(mean_p - mu[1]) < 1e-6
    assert np.abs(built - sigma).max() < 1e-6
    return rho


def _psd_sqrt(M):
    w, V = np.linalg.eigh(M)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def uhlmann_fidelity(rho1, rho2):
    root = _psd_sqrt(rho1)
    w = np.linalg.eigvalsh(root @ rho2 @ root)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
