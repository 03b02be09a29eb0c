"""Independent brute-force verifiers for the closed-form solvers.

Nothing here reuses solver output: the maximizer is found by projected
gradient ascent with alternating feasibility projections, the
water-filling allocation by exhaustive prefix enumeration, and the
momentum parameter by a dense grid. Tests compare closed forms against
these reports one-sidedly (the oracle must never beat the closed form).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidBudget
from .moments import as_matrix
from .stateless import Diagonal, Frobenius, Lyapunov, Spectral

__all__ = ["OracleReport", "oracle_maximize", "oracle_water_fill",
           "oracle_beta_grid"]

ALTERNATIONS = 50
DEFAULT_RESTARTS = 5


@dataclass
class OracleReport:
    best_value: float
    best_point: np.ndarray
    iterations: int
    converged: bool


def _psd_part(q):
    w, v = linalg.eigh(q)
    wc = np.maximum(w, 0.0)
    out = (v * wc) @ v.T
    return 0.5 * (out + out.T)


def _project_region(region, q, sigma):
    """Pull a PSD iterate back inside one trust region."""
    if isinstance(region, Frobenius):
        fro = np.linalg.norm(q, "fro")
        root_b = math.sqrt(region.budget)
        if fro > root_b:
            q = q * (root_b / fro)
        return q
    if isinstance(region, Spectral):
        w, v = linalg.eigh(q)
        w = np.clip(w, 0.0, region.lam)
        if np.sum(w) > region.tau:
            w = _capped_simplex(w, region.tau, region.lam)
        out = (v * w) @ v.T
        return 0.5 * (out + out.T)
    if isinstance(region, Lyapunov):
        t = float(np.sum((q @ q) * sigma))
        if t > region.budget:
            q = q * math.sqrt(region.budget / t)
        return q
    if isinstance(region, Diagonal):
        c = np.asarray(region.costs, dtype=float)
        qd = np.maximum(np.diag(q), 0.0)
        t = float(np.sum(c * qd ** 2))
        if t > region.budget:
            qd = qd * math.sqrt(region.budget / t)
        return np.diag(qd)
    raise InvalidBudget(f"unknown trust region {region!r}")


def _capped_simplex(w, tau, cap):
    """Project nonneg entries onto {0 <= q <= cap, sum q = tau} by bisection."""
    lo, hi = 0.0, float(np.max(w))
    for _ in range(100):
        mu = 0.5 * (lo + hi)
        total = np.sum(np.clip(w - mu, 0.0, cap))
        if total > tau:
            lo = mu
        else:
            hi = mu
    return np.clip(w - hi, 0.0, cap)


def oracle_maximize(region, sigma, iters=200, restarts=DEFAULT_RESTARTS,
                    seed=0):
    """Projected gradient ascent on Tr(Q Sigma) over one trust region.

    Each gradient step adds s * Sigma with s = 0.1/||Sigma||_F, then
    alternates PSD projection and region projection (up to 50 rounds,
    stopping early at a fixed point). Best feasible iterate over all
    restarts is reported.
    """
    s = as_matrix(sigma)
    d = s.shape[0]
    fro = np.linalg.norm(s, "fro")
    if fro == 0.0:
        return OracleReport(0.0, np.zeros((d, d)), 0, True)
    step = 0.1 / fro
    rng = np.random.default_rng(seed)

    best_val = -np.inf
    best_q = None
    total_iters = 0
    for _ in range(max(1, restarts)):
        q = rng.standard_normal((d, d))
        q = _psd_part(0.5 * (q + q.T))
        q = _project_region(region, q, s)
        prev_val = -np.inf
        for _ in range(iters):
            q = q + step * s
            for _ in range(ALTERNATIONS):
                q_new = _project_region(region, _psd_part(q), s)
                if np.max(np.abs(q_new - q)) <= 1e-15 * (1.0 + np.max(np.abs(q))):
                    q = q_new
                    break
                q = q_new
            total_iters += 1
            val = float(np.sum(q * s))
            if abs(val - prev_val) <= 1e-14 * (1.0 + abs(val)):
                break
            prev_val = val
        val = float(np.sum(q * s))
        if val > best_val:
            best_val = val
            best_q = q
    return OracleReport(best_val, best_q, total_iters, True)


def oracle_water_fill(sigma, tau, lam, grid=0):
    """Exhaustive prefix enumeration for the capped allocation LP.

    For a linear objective over {0 <= q <= lam, sum q <= tau} with
    sigma sorted nonincreasing, some prefix-saturating allocation is
    optimal; trying every prefix length is therefore exact. A positive
    ``grid`` additionally evaluates fractional boundary splits as a
    cross-check (they can never win).
    """
    if not (tau > 0 and lam > 0):
        raise InvalidBudget("tau and lambda must be positive")
    sigma = np.asarray(sigma, dtype=float)
    d = sigma.size
    best_val = -np.inf
    best_q = None
    candidates = []
    for k in range(d + 1):
        rem = tau - k * lam
        if rem < 0:
            break
        q = np.zeros(d)
        q[:k] = lam
        if k < d:
            q[k] = min(lam, rem)
        candidates.append(q)
        if grid > 0 and k < d:
            for f in np.linspace(0.0, 1.0, grid):
                q2 = q.copy()
                q2[k] = min(lam, rem) * f
                candidates.append(q2)
    for q in candidates:
        val = float(np.dot(q, sigma))
        if val > best_val:
            best_val = val
            best_q = q
    return OracleReport(best_val, best_q, len(candidates), True)


def oracle_beta_grid(objective, grid_points=199):
    """Dense argmax of a scalar objective over the open interval (0,1)."""
    if grid_points < 2:
        raise InvalidBudget("need at least 2 grid points")
    betas = np.linspace(0.0, 1.0, grid_points + 2)[1:-1]
    values = np.array([objective(b) for b in betas], dtype=float)
    idx = int(np.argmax(values))
    return OracleReport(float(values[idx]), float(betas[idx]),
                        grid_points, True)
