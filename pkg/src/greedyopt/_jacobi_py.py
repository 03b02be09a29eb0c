"""Pure-Python twin of the compiled cyclic Jacobi kernel.

Same algorithm and same return contract as ``_jacobi.jacobi_eigh``;
used when the compiled extension is unavailable or explicitly disabled.
"""

import math

import numpy as np


def jacobi_eigh(a_in, rel_tol=1e-14, max_sweeps=100):
    """Diagonalize a symmetric matrix with cyclic Jacobi rotations.

    Returns (w, v, sweeps, converged); see the compiled kernel for the
    meaning of each field.
    """
    a = np.array(a_in, dtype=np.float64, order="C")
    n = a.shape[0]
    v = np.eye(n, dtype=np.float64)

    fro = math.sqrt(float(np.sum(a * a)))
    thresh = rel_tol * fro
    if fro == 0.0:
        return np.zeros(n), v, 0, True

    skip_tol = thresh / (n * n)
    converged = False
    sweep = 0
    while sweep < max_sweeps:
        off = math.sqrt(2.0 * sum(
            a[p, q] * a[p, q] for p in range(n - 1) for q in range(p + 1, n)))
        if off <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_tol:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = 0.5 * (aqq - app) / apq
                if theta >= 0.0:
                    t = 1.0 / (theta + math.hypot(1.0, theta))
                else:
                    t = 1.0 / (theta - math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = aip - s * (aiq + tau * aip)
                        a[i, q] = aiq + s * (aip - tau * aiq)
                        a[p, i] = a[i, p]
                        a[q, i] = a[i, q]
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = vip - s * (viq + tau * vip)
                    v[i, q] = viq + s * (vip - tau * viq)
        sweep += 1
    else:
        off = math.sqrt(2.0 * sum(
            a[p, q] * a[p, q] for p in range(n - 1) for q in range(p + 1, n)))
        converged = off <= thresh

    return np.diag(a).copy(), v, sweep, converged
