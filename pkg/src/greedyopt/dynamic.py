"""Dynamic optimizers as causal matrix filters.

A stateful optimizer is a causal convolution theta_dot[n] =
sum_k q_k g[n-k]; its size is measured by the Hilbert norm
sum_k Tr(q_k^T q_k) and its learning power is the Hilbert inner product
with the lag-moment sequence R[k]. The one-pole family
q_k = eta (1-beta) beta^k P covers SGD with momentum and its
preconditioned variants.
"""

import math

import numpy as np

from .errors import DimensionMismatch, InvalidBudget, NonFinite
from .moments import LagMoments, psd_project
from .stateless import Frobenius, solve as stateless_solve

__all__ = ["MatrixFilter", "OnePoleSpec", "hilbert_inner",
           "one_pole_response", "solve_dynamic", "sgdm_objective",
           "sgdm_optimal_lr", "adam_objective", "filter_to_json",
           "filter_from_json", "DEFAULT_TRUNCATION", "DEFAULT_EPS"]

# Tail mass of a one-pole filter beyond K taps is beta^(2(K+1))/(1-beta^2)
# of the full norm; size K against beta accordingly.
DEFAULT_TRUNCATION = 64
DEFAULT_EPS = 1e-8


class MatrixFilter:
    """Truncated causal impulse response: symmetric taps q_0..q_K."""

    def __init__(self, taps):
        mats = [np.asarray(t, dtype=float) for t in taps]
        if not mats:
            raise DimensionMismatch("a filter needs at least one tap")
        d = mats[0].shape[0]
        for t in mats:
            if t.shape != (d, d):
                raise DimensionMismatch("all taps must be square, same dim")
            if not np.all(np.isfinite(t)):
                raise NonFinite("filter tap contains NaN or Inf")
        self.taps = [0.5 * (t + t.T) for t in mats]
        self.dim = d

    def hilbert_norm_sq(self):
        return float(sum(np.sum(t * t) for t in self.taps))

    def __len__(self):
        return len(self.taps)


class OnePoleSpec:
    """EMA-momentum filter parameters: q_k = eta (1-beta) beta^k P."""

    def __init__(self, eta, beta, base):
        if not (0.0 <= beta < 1.0):
            raise InvalidBudget("beta must lie in [0, 1)")
        if eta < 0.0:
            raise InvalidBudget("eta must be nonnegative")
        self.eta = float(eta)
        self.beta = float(beta)
        self.base = np.asarray(base, dtype=float)


def hilbert_inner(a, b):
    """Sum over lags of Tr(a_k^T b_k), up to the shorter sequence."""
    b_mats = b.lags if isinstance(b, LagMoments) else b.taps
    if a.dim != (b.dim if hasattr(b, "dim") else b_mats[0].shape[0]):
        raise DimensionMismatch("filter and moments differ in dim")
    n = min(len(a.taps), len(b_mats))
    return float(sum(np.sum(a.taps[k] * b_mats[k]) for k in range(n)))


def one_pole_response(spec, max_lag=DEFAULT_TRUNCATION):
    """Materialize the truncated impulse response of a one-pole filter."""
    taps = [spec.eta * (1.0 - spec.beta) * spec.beta ** k * spec.base
            for k in range(max_lag + 1)]
    return MatrixFilter(taps)


def solve_dynamic(regions, r):
    """Optimal filter for per-lag regions or one global Frobenius budget.

    With a single Frobenius region the whole filter shares the budget
    and the maximizer is sqrt(B) R / ||R||_H. With one region per lag
    the problem decouples and each tap is an independent stateless
    solve on the sanitized R[k].
    """
    clean = [psd_project(m).entries for m in r.lags]
    if isinstance(regions, Frobenius):
        norm_sq = float(sum(np.sum(m * m) for m in clean))
        if norm_sq == 0.0:
            return MatrixFilter([np.zeros((r.dim, r.dim))
                                 for _ in range(r.max_lag + 1)])
        scale = math.sqrt(regions.budget / norm_sq)
        return MatrixFilter([scale * m for m in clean])
    regions = list(regions)
    if len(regions) != len(clean):
        raise DimensionMismatch("need one region per lag")
    taps = [stateless_solve(reg, m).q for reg, m in zip(regions, clean)]
    return MatrixFilter(taps)


def sgdm_objective(beta, g_now, m_unnorm):
    """Single-sample greedy momentum objective sqrt(1-beta^2) g.m.

    m_unnorm is the unnormalized momentum m[n] = g[n] + beta m[n-1]
    with m[-1] = 0; no geometric re-summation is performed here.
    """
    g_now = np.asarray(g_now, dtype=float)
    m_unnorm = np.asarray(m_unnorm, dtype=float)
    if g_now.shape != m_unnorm.shape:
        raise DimensionMismatch("gradient and momentum differ in shape")
    return math.sqrt(1.0 - beta * beta) * float(np.dot(g_now, m_unnorm))


def sgdm_optimal_lr(beta_star, budget, d):
    """Learning rate saturating the Hilbert budget at the chosen beta."""
    if not (budget > 0 and d >= 1):
        raise InvalidBudget("budget must be positive and d >= 1")
    if not (0.0 <= beta_star < 1.0):
        raise InvalidBudget("beta must lie in [0, 1)")
    return math.sqrt(budget * (1.0 + beta_star) / (d * (1.0 - beta_star)))


def adam_objective(beta1, g_now, m, v, eps=DEFAULT_EPS):
    """Greedy Adam objective a * g.u with u = m/c, c = sqrt(v) + eps."""
    g_now = np.asarray(g_now, dtype=float)
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (g_now.shape == m.shape == v.shape):
        raise DimensionMismatch("g, m, v must share shape")
    if np.any(v < 0):
        raise NonFinite("second moments must be nonnegative")
    c = np.sqrt(v) + eps
    if np.any(c <= 0.0):
        raise NonFinite("zero cost with eps=0; objective undefined")
    w = float(np.sum(1.0 / c))
    u = m / c
    a = math.sqrt((1.0 + beta1) / ((1.0 - beta1) * w))
    return a * float(np.dot(g_now, u))


def filter_to_json(f):
    return {"dim": int(f.dim),
            "taps": [[list(map(float, row)) for row in t] for t in f.taps]}


def filter_from_json(obj):
    return MatrixFilter([np.asarray(t, dtype=float) for t in obj["taps"]])
