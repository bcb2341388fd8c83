# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step integrator for the joint moment dynamics.

Hot inner loop of `cohobs.moments.integrate_joint_moments`: classic RK4 on
mu' = A mu and sigma' = A sigma + sigma A^T + N with per-step
re-symmetrization. Semantics mirror the NumPy fallback in `_rk4_py`.
"""

import numpy as np

from libc.math cimport isfinite


cdef void _matvec(double[:, ::1] A, double[::1] x, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += A[i, j] * x[j]
        out[i] = s


cdef void _lyap_rhs(double[:, ::1] A, double[:, ::1] S, double[:, ::1] N,
                    double[:, ::1] work, double[:, ::1] out) noexcept nogil:
    # out = A S + (A S)^T + N
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += A[i, k] * S[k, j]
            work[i, j] = s
    for i in range(n):
        for j in range(n):
            out[i, j] = work[i, j] + work[j, i] + N[i, j]


def run(double[:, ::1] A, double[:, ::1] N, double[::1] mu0, double[:, ::1] sigma0,
        double dt, Py_ssize_t n_steps, Py_ssize_t stride,
        double[:, ::1] out_mu, double[:, :, ::1] out_sigma):
    """Mirror of `_rk4_py.run`; returns the first bad sample slot or -1."""
    cdef Py_ssize_t n = A.shape[0]
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    mu_arr = np.empty(n)
    tmpv_arr = np.empty(n)
    k1m_arr = np.empty(n)
    k2m_arr = np.empty(n)
    k3m_arr = np.empty(n)
    k4m_arr = np.empty(n)
    sig_arr = np.empty((n, n))
    tmp_arr = np.empty((n, n))
    w_arr = np.empty((n, n))
    k1_arr = np.empty((n, n))
    k2_arr = np.empty((n, n))
    k3_arr = np.empty((n, n))
    k4_arr = np.empty((n, n))

    cdef double[::1] mu = mu_arr
    cdef double[::1] tmpv = tmpv_arr
    cdef double[::1] k1m = k1m_arr
    cdef double[::1] k2m = k2m_arr
    cdef double[::1] k3m = k3m_arr
    cdef double[::1] k4m = k4m_arr
    cdef double[:, ::1] sig = sig_arr
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] w = w_arr
    cdef double[:, ::1] k1 = k1_arr
    cdef double[:, ::1] k2 = k2_arr
    cdef double[:, ::1] k3 = k3_arr
    cdef double[:, ::1] k4 = k4_arr

    cdef Py_ssize_t slot = 1
    cdef Py_ssize_t step, i, j
    cdef double s
    cdef bint ok = 1
    cdef Py_ssize_t bad = -1

    for i in range(n):
        mu[i] = mu0[i]
        out_mu[0, i] = mu0[i]
        for j in range(n):
            sig[i, j] = sigma0[i, j]
            out_sigma[0, i, j] = sigma0[i, j]

    with nogil:
        for step in range(1, n_steps + 1):
            # mean stages
            _matvec(A, mu, k1m)
            for i in range(n):
                tmpv[i] = mu[i] + half * k1m[i]
            _matvec(A, tmpv, k2m)
            for i in range(n):
                tmpv[i] = mu[i] + half * k2m[i]
            _matvec(A, tmpv, k3m)
            for i in range(n):
                tmpv[i] = mu[i] + dt * k3m[i]
            _matvec(A, tmpv, k4m)
            for i in range(n):
                mu[i] = mu[i] + sixth * (k1m[i] + 2.0 * (k2m[i] + k3m[i]) + k4m[i])

            # covariance stages
            _lyap_rhs(A, sig, N, w, k1)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = sig[i, j] + half * k1[i, j]
            _lyap_rhs(A, tmp, N, w, k2)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = sig[i, j] + half * k2[i, j]
            _lyap_rhs(A, tmp, N, w, k3)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = sig[i, j] + dt * k3[i, j]
            _lyap_rhs(A, tmp, N, w, k4)
            for i in range(n):
                for j in range(n):
                    sig[i, j] = sig[i, j] + sixth * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])
            for i in range(n):
                for j in range(i + 1, n):
                    s = 0.5 * (sig[i, j] + sig[j, i])
                    sig[i, j] = s
                    sig[j, i] = s

            if step % stride == 0 or step == n_steps:
                ok = 1
                for i in range(n):
                    out_mu[slot, i] = mu[i]
                    if not isfinite(mu[i]):
                        ok = 0
                    for j in range(n):
                        out_sigma[slot, i, j] = sig[i, j]
                        if not isfinite(sig[i, j]):
                            ok = 0
                if not ok:
                    bad = slot
                    break
                slot += 1

    return bad
