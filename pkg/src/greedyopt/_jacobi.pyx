# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cyclic Jacobi eigendecomposition of dense symmetric matrices.

Compiled hot kernel. A pure-Python twin lives in ``_jacobi_py`` and the
dispatch between the two happens in :mod:`greedyopt.linalg`.
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport fabs, hypot, sqrt

cnp.import_array()


def jacobi_eigh(cnp.ndarray[cnp.float64_t, ndim=2] a_in,
                double rel_tol=1e-14, int max_sweeps=100):
    """Diagonalize a symmetric matrix with cyclic Jacobi rotations.

    Returns (w, v, sweeps, converged) where w holds the unsorted
    eigenvalues, the columns of v are the matching eigenvectors,
    sweeps is the number of full sweeps performed and converged tells
    whether the off-diagonal mass fell below rel_tol times the
    Frobenius norm of the input.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(a_in, dtype=np.float64, order="C")
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = np.eye(n, dtype=np.float64)
    cdef Py_ssize_t p, q, i, sweep
    cdef double fro = 0.0, off, thresh
    cdef double apq, app, aqq, theta, t, c, s, tau, aip, aiq, vip, viq

    for p in range(n):
        for q in range(n):
            fro += a[p, q] * a[p, q]
    fro = sqrt(fro)
    thresh = rel_tol * fro

    if fro == 0.0:
        return np.zeros(n), v, 0, True

    cdef bint converged = False
    sweep = 0
    while sweep < max_sweeps:
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if off <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= thresh / (n * n):
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = 0.5 * (aqq - app) / apq
                # smaller-magnitude root for a stable rotation
                if theta >= 0.0:
                    t = 1.0 / (theta + hypot(1.0, theta))
                else:
                    t = 1.0 / (theta - hypot(1.0, theta))
                c = 1.0 / hypot(1.0, t)
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
        # loop exhausted without break; re-check the final off-diagonal mass
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        converged = sqrt(2.0 * off) <= thresh

    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweep, converged
