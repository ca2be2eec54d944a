# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; behaviour matches ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, copysign

cnp.import_array()

NAME = "cython"


def chain_begins(const signed char[::1] is_tube, const long long[::1] cmin,
                 const long long[::1] cmax, const long long[:, ::1] runs,
                 Py_ssize_t e, Py_ssize_t lo_bound):
    cdef Py_ssize_t k = is_tube.shape[0]
    out = np.zeros(e + 1, dtype=np.uint8)
    if lo_bound > e:
        return out
    cdef unsigned char[::1] reach = out
    cdef long long[::1] diff = np.zeros(e + 2, dtype=np.int64)
    cdef Py_ssize_t j, p, start, stop, low, any_reach
    cdef long long cap, run, acc
    reach[e] = 1
    for j in range(k - 1, -1, -1):
        any_reach = 0
        for p in range(lo_bound, e + 2):
            diff[p] = 0
        for p in range(lo_bound, e + 1):
            if not reach[p]:
                continue
            any_reach = 1
            cap = cmax[j]
            if p - lo_bound < cap:
                cap = p - lo_bound
            if is_tube[j]:
                run = runs[j, p - 1] if p > 0 else 0
                if run < cap:
                    cap = run
                low = cmin[j] if cmin[j] > 1 else 1
            else:
                low = cmin[j]
            start = p - cap
            stop = p - low
            if start <= stop:
                diff[start] += 1
                diff[stop + 1] -= 1
        if not any_reach:
            break
        acc = 0
        for p in range(lo_bound, e + 1):
            acc += diff[p]
            reach[p] = 1 if acc > 0 else 0
    return out


def arx_overpotential(const double[:, ::1] theta, const double[::1] current):
    cdef Py_ssize_t n = current.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double vprev = 0.0
    cdef double iprev = current[0] if n else 0.0
    cdef Py_ssize_t k
    for k in range(n):
        vprev = theta[k, 0] * vprev + theta[k, 1] * current[k] + theta[k, 2] * iprev
        o[k] = vprev
        iprev = current[k]
    return out


def rls_filter(const double[::1] vbar, const double[::1] current, double lam,
               theta0, p0):
    cdef Py_ssize_t n = vbar.shape[0]
    out = np.empty((n, 3))
    cdef double[:, ::1] o = out
    cdef double th[3]
    cdef double P[3][3]
    cdef double Q[3][3]
    cdef double f[3]
    cdef double g[3]
    cdef double L[3]
    cdef double den, err, row
    cdef Py_ssize_t k, r, s
    for r in range(3):
        th[r] = theta0[r]
        for s in range(3):
            P[r][s] = p0[r][s]
    if n:
        for r in range(3):
            o[0, r] = th[r]
    for k in range(1, n):
        f[0] = vbar[k - 1]
        f[1] = current[k]
        f[2] = current[k - 1]
        for r in range(3):
            g[r] = P[r][0] * f[0] + P[r][1] * f[1] + P[r][2] * f[2]
        den = lam + f[0] * g[0] + f[1] * g[1] + f[2] * g[2]
        for r in range(3):
            L[r] = g[r] / den
        err = vbar[k] - (th[0] * f[0] + th[1] * f[1] + th[2] * f[2])
        for r in range(3):
            th[r] = th[r] + L[r] * err
        for s in range(3):
            row = f[0] * P[0][s] + f[1] * P[1][s] + f[2] * P[2][s]
            for r in range(3):
                Q[r][s] = (P[r][s] - L[r] * row) / lam
        for r in range(3):
            for s in range(3):
                P[r][s] = 0.5 * (Q[r][s] + Q[s][r])
        for r in range(3):
            o[k, r] = th[r]
    pf = np.empty((3, 3))
    for r in range(3):
        for s in range(3):
            pf[r, s] = P[r][s]
    return out, pf


def jacobi_rotate(double[:, :] a, double tol, int max_sweeps):
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    vv = np.eye(n)
    cdef double[:, ::1] v = vv
    cdef Py_ssize_t p, q, i
    cdef int sweep, rotated
    cdef double alpha, beta, gamma, zeta, t, cs, sn, x, y
    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for i in range(m):
                    alpha += a[i, p] * a[i, p]
                    beta += a[i, q] * a[i, q]
                    gamma += a[i, p] * a[i, q]
                if alpha == 0.0 or beta == 0.0 or fabs(gamma) <= tol * sqrt(alpha * beta):
                    continue
                rotated = 1
                zeta = (beta - alpha) / (2.0 * gamma)
                t = copysign(1.0, zeta) / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
                cs = 1.0 / sqrt(1.0 + t * t)
                sn = cs * t
                for i in range(m):
                    x = a[i, p]
                    y = a[i, q]
                    a[i, p] = cs * x - sn * y
                    a[i, q] = sn * x + cs * y
                for i in range(n):
                    x = v[i, p]
                    y = v[i, q]
                    v[i, p] = cs * x - sn * y
                    v[i, q] = sn * x + cs * y
        if not rotated:
            return vv, sweep
    return vv, max_sweeps
