"""Convergence endpoints for preconditioned least-squares flows.

Gradient flow theta_dot = -Q J^T (J theta - y) from theta = 0 converges
to the minimum Q^{-1}-norm solution Q J^T (J Q J^T)^+ y; when Q commutes
with J^T J this collapses to the canonical pseudoinverse solution.
The kernel view: K_Q = J Q J^T governs the function-space dynamics and
its pseudoinverse yields the minimum-RKHS-norm interpolant.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (DimensionMismatch, InconsistentTarget, NonConvergence,
                     NonFinite)

__all__ = ["LeastSquaresProblem", "KernelMatrix", "analytic_endpoint",
           "flow_endpoint", "oak_kernel", "min_norm_interpolant",
           "flow_stability_bound"]

PINV_RCOND = 1e-10


@dataclass(frozen=True)
class LeastSquaresProblem:
    jac: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        jac = np.atleast_2d(np.asarray(self.jac, dtype=float))
        y = np.atleast_1d(np.asarray(self.target, dtype=float))
        if jac.shape[0] != y.shape[0]:
            raise DimensionMismatch("target length must match row count of J")
        if not (np.all(np.isfinite(jac)) and np.all(np.isfinite(y))):
            raise NonFinite("problem data contains NaN or Inf")
        object.__setattr__(self, "jac", jac)
        object.__setattr__(self, "target", y)


@dataclass(frozen=True)
class KernelMatrix:
    k: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        object.__setattr__(self, "k", 0.5 * (k + k.T))


def analytic_endpoint(q, prob):
    """Closed-form flow limit Q J^T (J Q J^T)^+ y."""
    q = np.asarray(q, dtype=float)
    jac = prob.jac
    if q.shape != (jac.shape[1], jac.shape[1]):
        raise DimensionMismatch("Q must be d x d for an n x d Jacobian")
    kq = jac @ q @ jac.T
    kq = 0.5 * (kq + kq.T)
    return q @ jac.T @ (linalg.pinv_psd(kq, PINV_RCOND) @ prob.target)


def flow_stability_bound(q, prob):
    """Largest stable explicit-Euler step 2 / lambda_max(Q J^T J)."""
    q = np.asarray(q, dtype=float)
    jac = prob.jac
    m = jac @ q @ jac.T
    w, _ = linalg.eigh(0.5 * (m + m.T))
    lam_max = float(w[0]) if w.size else 0.0
    return np.inf if lam_max <= 0.0 else 2.0 / lam_max


def flow_endpoint(q, prob, step, tol=1e-10, max_iters=200000):
    """Explicit-Euler integration of the preconditioned flow from zero.

    Iterates theta <- theta - step * Q J^T (J theta - y) until the flow
    velocity drops below tol. Raises NonConvergence when the iteration
    cap is hit first (step too large, or inconsistent target).
    """
    q = np.asarray(q, dtype=float)
    jac = prob.jac
    if q.shape != (jac.shape[1], jac.shape[1]):
        raise DimensionMismatch("Q must be d x d for an n x d Jacobian")
    theta = np.zeros(jac.shape[1])
    qjt = q @ jac.T
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iters):
            grad = qjt @ (jac @ theta - prob.target)
            if float(np.linalg.norm(grad)) <= tol:
                return theta
            theta = theta - step * grad
            if not np.all(np.isfinite(theta)):
                raise NonConvergence(
                    "flow diverged; step exceeds stability bound")
    raise NonConvergence(
        f"residual above tol after {max_iters} iterations")


def oak_kernel(jac, q):
    """Optimizer-augmented kernel J Q J^T (symmetrized)."""
    jac = np.atleast_2d(np.asarray(jac, dtype=float))
    q = np.asarray(q, dtype=float)
    if q.shape != (jac.shape[1], jac.shape[1]):
        raise DimensionMismatch("Q must be d x d for an n x d Jacobian")
    return KernelMatrix(jac @ q @ jac.T)


def min_norm_interpolant(k, y, ridge=0.0):
    """Minimum-RKHS-norm interpolant coefficients and squared norm.

    Returns (alpha, ||f||^2) with alpha = K^+ y (or (K + ridge I)^{-1} y
    for a positive ridge). Targets with a component outside range(K)
    beyond 1e-8 relative raise InconsistentTarget.
    """
    km = k.k if isinstance(k, KernelMatrix) else KernelMatrix(k).k
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape[0] != km.shape[0]:
        raise DimensionMismatch("target length must match kernel size")
    if ridge > 0.0:
        w, v = linalg.eigh(km)
        alpha = (v / (w + ridge)) @ (v.T @ y)
        return alpha, float(np.dot(y, alpha))
    kinv = linalg.pinv_psd(km, PINV_RCOND)
    alpha = kinv @ y
    resid = float(np.linalg.norm(km @ alpha - y))
    if resid > 1e-8 * max(float(np.linalg.norm(y)), 1e-300):
        raise InconsistentTarget(
            "target has a component outside the kernel range")
    return alpha, float(np.dot(y, alpha))
