"""Symmetric-matrix linear algebra built on the Jacobi kernel.

The eigendecomposition backend is the compiled Cython kernel when it is
importable; setting the environment variable ``GREEDYOPT_PURE_PYTHON=1``
(or a failed import) selects the pure-Python twin. Both implement the
same cyclic Jacobi sweep with relative off-diagonal threshold
``1e-14 * ||M||_F`` and at most 100 sweeps.
"""

import os

import numpy as np

from .errors import DimensionMismatch, NonFinite

if os.environ.get("GREEDYOPT_PURE_PYTHON", "").strip() in ("1", "true", "yes"):
    from . import _jacobi_py as _backend
    BACKEND = "python"
else:
    try:
        from . import _jacobi as _backend
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - build-dependent
        from . import _jacobi_py as _backend
        BACKEND = "python"

JACOBI_REL_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


def _check_square_finite(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix contains NaN or Inf")
    return m


def symmetrize(m):
    """Return the symmetric part (M + M^T)/2."""
    m = _check_square_finite(m)
    return 0.5 * (m + m.T)


def eigh(m):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns (w, V) with ``m @ V[:, i] == w[i] * V[:, i]``. The input is
    symmetrized first so slightly asymmetric matrices are accepted.
    """
    s = symmetrize(m)
    w, v, _sweeps, _converged = _backend.jacobi_eigh(
        s, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)
    order = np.argsort(w)[::-1]
    return np.asarray(w)[order], np.asarray(v)[:, order]


def pinv_psd(m, rcond=1e-10):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues at or below ``rcond`` times the largest eigenvalue are
    treated as zero.
    """
    w, v = eigh(m)
    lam_max = w[0] if w.size else 0.0
    if lam_max <= 0.0:
        return np.zeros_like(np.asarray(m, dtype=float))
    inv = np.where(w > rcond * lam_max, 1.0 / np.where(w > 0, w, 1.0), 0.0)
    return (v * inv) @ v.T


def support_projector(m, rcond=1e-10):
    """Orthogonal projector onto the column space of a symmetric PSD matrix."""
    w, v = eigh(m)
    lam_max = w[0] if w.size else 0.0
    if lam_max <= 0.0:
        return np.zeros_like(np.asarray(m, dtype=float))
    keep = w > rcond * lam_max
    vk = v[:, keep]
    return vk @ vk.T
