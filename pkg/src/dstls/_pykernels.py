"""Pure-Python/numpy implementations of the hot kernels.

Signatures mirror ``_ckernels.pyx`` exactly; :mod:`dstls.kernels` picks one.
"""

import math

import numpy as np

NAME = "python"


def chain_begins(is_tube, cmin, cmax, runs, e, lo_bound):
    reach = np.zeros(e + 1, dtype=bool)
    if lo_bound > e:
        return reach.astype(np.uint8)
    reach[e] = True
    for j in range(len(is_tube) - 1, -1, -1):
        ps = np.flatnonzero(reach)
        if len(ps) == 0:
            break
        cap = np.minimum(cmax[j], ps - lo_bound)
        if is_tube[j]:
            run = np.where(ps > 0, runs[j][np.maximum(ps - 1, 0)], 0)
            cap = np.minimum(cap, run)
            low = max(int(cmin[j]), 1)
        else:
            low = int(cmin[j])
        start = ps - cap
        stop = ps - low
        ok = start <= stop
        diff = np.zeros(e + 2, dtype=np.int64)
        np.add.at(diff, start[ok], 1)
        np.add.at(diff, stop[ok] + 1, -1)
        reach = np.cumsum(diff[: e + 1]) > 0
    return reach.astype(np.uint8)


def arx_overpotential(theta, current):
    n = len(current)
    out = np.empty(n)
    vprev = 0.0
    iprev = float(current[0]) if n else 0.0
    th = theta.tolist()
    cur = current.tolist()
    for k in range(n):
        t1, t2, t3 = th[k]
        ik = cur[k]
        vprev = t1 * vprev + t2 * ik + t3 * iprev
        out[k] = vprev
        iprev = ik
    return out


def rls_filter(vbar, current, lam, theta0, p0):
    n = len(vbar)
    out = np.empty((n, 3))
    a, b, c = (float(x) for x in theta0)
    P = [[float(p0[i][j]) for j in range(3)] for i in range(3)]
    v = vbar.tolist()
    cur = current.tolist()
    if n:
        out[0] = (a, b, c)
    for k in range(1, n):
        f0, f1, f2 = v[k - 1], cur[k], cur[k - 1]
        g0 = P[0][0] * f0 + P[0][1] * f1 + P[0][2] * f2
        g1 = P[1][0] * f0 + P[1][1] * f1 + P[1][2] * f2
        g2 = P[2][0] * f0 + P[2][1] * f1 + P[2][2] * f2
        den = lam + f0 * g0 + f1 * g1 + f2 * g2
        l0, l1, l2 = g0 / den, g1 / den, g2 / den
        err = v[k] - (a * f0 + b * f1 + c * f2)
        a += l0 * err
        b += l1 * err
        c += l2 * err
        # (I - L phi^T) P / lam; row r of phi^T P is g (P symmetric)
        L = (l0, l1, l2)
        Q = [[(P[r][s] - L[r] * (f0 * P[0][s] + f1 * P[1][s] + f2 * P[2][s])) / lam for s in range(3)] for r in range(3)]
        P = [[0.5 * (Q[r][s] + Q[s][r]) for s in range(3)] for r in range(3)]
        out[k] = (a, b, c)
    return out, np.array(P)


def jacobi_rotate(a, tol, max_sweeps):
    """One-sided Jacobi: orthogonalise the columns of ``a`` in place.

    Returns the accumulated right rotation ``v`` and the sweep count.
    """
    m, n = a.shape
    v = np.eye(n)
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                ap = a[:, p]
                aq = a[:, q]
                alpha = float(ap @ ap)
                beta = float(aq @ aq)
                gamma = float(ap @ aq)
                if alpha == 0.0 or beta == 0.0 or abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                new_p = cs * ap - sn * aq
                a[:, q] = sn * ap + cs * aq
                a[:, p] = new_p
                vp = v[:, p].copy()
                v[:, p] = cs * vp - sn * v[:, q]
                v[:, q] = sn * vp + cs * v[:, q]
        if not rotated:
            return v, sweep
    return v, max_sweeps
