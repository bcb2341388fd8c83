"""NumPy fallback for the fixed-step moment integrator.

Semantics match the compiled kernel in `_rk4_cy`: classic fourth-order
Runge-Kutta on mu' = A mu and sigma' = A sigma + sigma A^T + N, with the
covariance re-symmetrized after every step. Samples are stored at steps
{0, stride, 2*stride, ...} plus the final step.
"""

import numpy as np


def run(A, N, mu0, sigma0, dt, n_steps, stride, out_mu, out_sigma):
    """Fill out_mu/out_sigma at the sample steps.

    Returns the index of the first sample slot holding non-finite values
    (integration is abandoned there), or -1 on success.
    """
    mu = mu0.copy()
    sig = sigma0.copy()
    out_mu[0] = mu
    out_sigma[0] = sig
    slot = 1
    half = 0.5 * dt
    sixth = dt / 6.0

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            k1m = A @ mu
            k2m = A @ (mu + half * k1m)
            k3m = A @ (mu + half * k2m)
            k4m = A @ (mu + dt * k3m)
            mu = mu + sixth * (k1m + 2.0 * (k2m + k3m) + k4m)

            w = A @ sig
            k1 = w + w.T + N
            w = A @ (sig + half * k1)
            k2 = w + w.T + N
            w = A @ (sig + half * k2)
            k3 = w + w.T + N
            w = A @ (sig + dt * k3)
            k4 = w + w.T + N
            sig = sig + sixth * (k1 + 2.0 * (k2 + k3) + k4)
            sig = 0.5 * (sig + sig.T)

            if k % stride == 0 or k == n_steps:
                out_mu[slot] = mu
                out_sigma[slot] = sig
                if not (np.isfinite(mu).all() and np.isfinite(sig).all()):
                    return slot
                slot += 1
    return -1
