# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled trapezoidal Volterra stepper.

Same scheme as the numpy fallback; the history sum runs over the lag index
with Kahan compensation, so the two backends may differ only by the rounding
of that reduction.
"""

import numpy as np


def volterra_direct(double complex[:, ::1] Ainv,
                    double complex[:, ::1] Omega,
                    double complex[:, :, ::1] Kstack,
                    double complex[:, ::1] R,
                    double complex[::1] x0,
                    double dt):
    cdef Py_ssize_t nT = R.shape[0]
    cdef Py_ssize_t n = x0.shape[0]
    X_arr = np.zeros((nT, n), dtype=np.complex128)
    F_arr = np.zeros((nT, n), dtype=np.complex128)
    cdef double complex[:, ::1] X = X_arr
    cdef double complex[:, ::1] F = F_arr
    cdef double complex[::1] H = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] b = np.zeros(n, dtype=np.complex128)
    cdef Py_ssize_t m, i, j, k
    cdef double complex s, c, y, t, term, acc
    cdef double half = 0.5 * dt

    for i in range(n):
        X[0, i] = x0[i]
        acc = R[0, i]
        for j in range(n):
            acc = acc + Omega[i, j] * x0[j]
        F[0, i] = acc

    for m in range(1, nT):
        for i in range(n):
            s = 0
            c = 0
            term = 0
            for j in range(n):
                term = term + Kstack[m, i, j] * X[0, j]
            term = 0.5 * term
            y = term - c
            t = s + y
            c = (t - s) - y
            s = t
            for k in range(1, m):
                term = 0
                for j in range(n):
                    term = term + Kstack[m - k, i, j] * X[k, j]
                y = term - c
                t = s + y
                c = (t - s) - y
                s = t
            H[i] = dt * s
        for i in range(n):
            b[i] = X[m - 1, i] + half * (F[m - 1, i] + R[m, i] + H[i])
        for i in range(n):
            acc = 0
            for j in range(n):
                acc = acc + Ainv[i, j] * b[j]
            X[m, i] = acc
        for i in range(n):
            acc = R[m, i] + H[i]
            for j in range(n):
                acc = acc + (Omega[i, j] + half * Kstack[0, i, j]) * X[m, j]
            F[m, i] = acc
    return X_arr, F_arr
