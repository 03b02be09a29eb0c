"""Closed-form optimal stateless optimizers over convex trust regions.

Four feasible families are supported. Each admits a closed-form
maximizer of the learning power Tr(Q Sigma) together with the optimal
power value:

* Frobenius ball  {Q >= 0 : ||Q||_F <= sqrt(B)}
* Spectral        {Q >= 0 : Tr(Q) <= tau, Q <= lam * I}
* Lyapunov        {Q >= 0 : Tr(Q^2 Sigma) <= B}
* Diagonal        {Q = diag(q) >= 0 : sum_j c_j q_j^2 <= B}
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (DimensionMismatch, InvalidBudget, NonPositiveCost,
                     NonPSDInput)
from .moments import MomentMatrix, as_matrix, psd_project

__all__ = [
    "Frobenius", "Spectral", "Lyapunov", "Diagonal",
    "OptimalSolution", "learning_power", "water_fill", "solve",
    "polar_gauge", "feasibility_gap", "solution_to_json",
]

SUPPORT_RCOND = 1e-10


@dataclass(frozen=True)
class Frobenius:
    budget: float

    def __post_init__(self):
        if not (self.budget > 0):
            raise InvalidBudget("Frobenius budget B must be positive")


@dataclass(frozen=True)
class Spectral:
    tau: float
    lam: float

    def __post_init__(self):
        if not (self.tau > 0 and self.lam > 0):
            raise InvalidBudget("Spectral parameters tau, lambda must be positive")


@dataclass(frozen=True)
class Lyapunov:
    budget: float

    def __post_init__(self):
        if not (self.budget > 0):
            raise InvalidBudget("Lyapunov budget B must be positive")


@dataclass(frozen=True)
class Diagonal:
    budget: float
    costs: tuple = field(default=())

    def __post_init__(self):
        if not (self.budget > 0):
            raise InvalidBudget("Diagonal budget B must be positive")
        c = np.asarray(self.costs, dtype=float)
        if c.size == 0 or np.any(c <= 0):
            raise NonPositiveCost("all diagonal costs must be > 0")
        object.__setattr__(self, "costs", tuple(float(x) for x in c))


@dataclass(frozen=True)
class OptimalSolution:
    q: np.ndarray
    power: float


def learning_power(q, sigma):
    """Expected instantaneous loss-decrease rate Tr(Q Sigma)."""
    q = np.asarray(q, dtype=float)
    s = as_matrix(sigma)
    if q.shape != s.shape:
        raise DimensionMismatch(f"shape mismatch {q.shape} vs {s.shape}")
    return float(np.sum(q * s))


def water_fill(sigma_sorted, tau, lam):
    """Greedy eigenvalue allocation: fill caps in decreasing-sigma order.

    Allocates lam to the top k = floor(tau/lam) directions, the leftover
    tau - k*lam to the next one, zero beyond. The allocation total is
    min(tau, d*lam).
    """
    if not (tau > 0 and lam > 0):
        raise InvalidBudget("tau and lambda must be positive")
    sigma_sorted = np.asarray(sigma_sorted, dtype=float)
    d = sigma_sorted.size
    q = np.zeros(d)
    k = int(math.floor(tau / lam))
    if k >= d:
        q[:] = lam
        return q
    q[:k] = lam
    q[k] = tau - k * lam
    return q


def _validate_psd(sigma):
    s = as_matrix(sigma)
    w, v = linalg.eigh(s)
    lam_max = abs(w[0]) if w.size else 0.0
    if w.size and w[-1] < -1e-10 * max(lam_max, 1e-300):
        raise NonPSDInput(
            f"moment matrix has eigenvalue {w[-1]:.3e} below tolerance")
    return s, np.maximum(w, 0.0), v


def solve(region, sigma):
    """Closed-form optimal optimizer and power for one trust region.

    A zero moment matrix yields the canonical representative Q = 0 with
    power 0 for every family.
    """
    s, w, v = _validate_psd(sigma)
    d = s.shape[0]

    if isinstance(region, Frobenius):
        fro = float(np.linalg.norm(s, "fro"))
        if fro == 0.0:
            return OptimalSolution(np.zeros((d, d)), 0.0)
        root_b = math.sqrt(region.budget)
        q = root_b * s / fro
        return OptimalSolution(q, root_b * fro)

    if isinstance(region, Spectral):
        if w[0] == 0.0:
            return OptimalSolution(np.zeros((d, d)), 0.0)
        alloc = water_fill(w, region.tau, region.lam)
        q = (v * alloc) @ v.T
        q = 0.5 * (q + q.T)
        return OptimalSolution(q, float(np.dot(alloc, w)))

    if isinstance(region, Lyapunov):
        if w[0] == 0.0:
            return OptimalSolution(np.zeros((d, d)), 0.0)
        keep = w > SUPPORT_RCOND * w[0]
        total = float(np.sum(w[keep]))
        alpha = math.sqrt(region.budget / total)
        vk = v[:, keep]
        q = alpha * (vk @ vk.T)
        q = 0.5 * (q + q.T)
        return OptimalSolution(q, alpha * total)

    if isinstance(region, Diagonal):
        c = np.asarray(region.costs, dtype=float)
        if c.size != d:
            raise DimensionMismatch(
                f"costs length {c.size} does not match dim {d}")
        diag = np.maximum(np.diag(s), 0.0)
        weight = float(np.sum(diag ** 2 / c))
        if weight == 0.0:
            return OptimalSolution(np.zeros((d, d)), 0.0)
        alpha = math.sqrt(region.budget / weight)
        q = np.diag(alpha * diag / c)
        return OptimalSolution(q, math.sqrt(region.budget * weight))

    raise InvalidBudget(f"unknown trust region {region!r}")


def polar_gauge(region, m):
    """Support value sup over the region of Tr(Q m) for symmetric m.

    Since every region lives inside the PSD cone, only the PSD part of m
    contributes; the negative eigendirections of m are annihilated by
    the optimal Q.
    """
    proj = psd_project(m)
    return solve(region, proj).power


def feasibility_gap(region, q, sigma=None):
    """How far a matrix sits outside the region (0 means feasible).

    Returns the largest constraint violation: norm/trace/cap overshoot
    plus the magnitude of the most negative eigenvalue.
    """
    q = np.asarray(q, dtype=float)
    w, _ = linalg.eigh(q)
    gap = max(0.0, -float(w[-1])) if w.size else 0.0
    if isinstance(region, Frobenius):
        gap = max(gap, float(np.linalg.norm(q, "fro")) - math.sqrt(region.budget))
    elif isinstance(region, Spectral):
        gap = max(gap, float(np.trace(q)) - region.tau,
                  float(w[0]) - region.lam)
    elif isinstance(region, Lyapunov):
        s = as_matrix(sigma)
        gap = max(gap, float(np.sum((q @ q) * s)) - region.budget)
    elif isinstance(region, Diagonal):
        c = np.asarray(region.costs, dtype=float)
        qd = np.diag(q)
        gap = max(gap, float(np.sum(c * qd ** 2)) - region.budget,
                  float(np.max(np.abs(q - np.diag(qd)))))
    return max(gap, 0.0)


def region_family_name(region):
    return {Frobenius: "frobenius", Spectral: "spectral",
            Lyapunov: "lyapunov", Diagonal: "diagonal"}[type(region)]


def region_params(region):
    if isinstance(region, Frobenius) or isinstance(region, Lyapunov):
        return {"budget": region.budget}
    if isinstance(region, Spectral):
        return {"tau": region.tau, "lambda": region.lam}
    if isinstance(region, Diagonal):
        return {"budget": region.budget, "costs": list(region.costs)}
    raise InvalidBudget(f"unknown trust region {region!r}")


def solution_to_json(region, sol):
    return {
        "family": region_family_name(region),
        "params": region_params(region),
        "q": [list(map(float, row)) for row in sol.q],
        "power": float(sol.power),
    }
