"""Gradient statistics: second moments, lag autocorrelations, sanitizers.

Everything downstream consumes the types defined here. Sampled moments
are symmetrized and eigenvalue-clamped (rather than rejected) so the
solvers always see PSD input.
"""

import csv
import json

import numpy as np

from . import linalg
from .errors import (DimensionMismatch, EmptyStream, InsufficientSamples,
                     NonFinite)

__all__ = [
    "GradientStream", "MomentMatrix", "LagMoments",
    "estimate_moment", "psd_project",
    "estimate_lag_moments", "estimate_validation_moments",
    "matrix_to_json", "matrix_from_json", "save_matrix_csv",
    "load_matrix_csv", "lag_moments_to_json", "lag_moments_from_json",
]


class GradientStream:
    """Ordered list of gradient samples g[0..N-1], each a d-vector."""

    def __init__(self, samples):
        arr = np.atleast_2d(np.asarray(samples, dtype=float))
        if arr.ndim != 2:
            raise DimensionMismatch("samples must form an N x d array")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("gradient samples contain NaN or Inf")
        self.samples = arr
        self.dim = arr.shape[1]

    def __len__(self):
        return self.samples.shape[0]


class MomentMatrix:
    """Symmetric PSD second-moment matrix of gradients."""

    def __init__(self, entries):
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch("moment matrix must be square")
        if not np.all(np.isfinite(entries)):
            raise NonFinite("moment matrix contains NaN or Inf")
        # force exact symmetry
        self.entries = 0.5 * (entries + entries.T)
        self.dim = entries.shape[0]

    def eig(self):
        """Eigenvalues (descending) and eigenvectors."""
        return linalg.eigh(self.entries)


class LagMoments:
    """Lag autocorrelations R[0..K]; each lag matrix symmetric."""

    def __init__(self, lags):
        mats = [0.5 * (np.asarray(m, dtype=float) +
                       np.asarray(m, dtype=float).T) for m in lags]
        if not mats:
            raise EmptyStream("need at least the lag-0 matrix")
        d = mats[0].shape[0]
        for m in mats:
            if m.shape != (d, d):
                raise DimensionMismatch("all lag matrices must share shape")
            if not np.all(np.isfinite(m)):
                raise NonFinite("lag moments contain NaN or Inf")
        self.lags = mats
        self.dim = d
        self.max_lag = len(mats) - 1


def as_matrix(sigma):
    """Accept a MomentMatrix or a raw array; return the ndarray."""
    if isinstance(sigma, MomentMatrix):
        return sigma.entries
    return np.asarray(sigma, dtype=float)


def estimate_moment(grads):
    """Empirical second moment (1/N) sum_n g[n] g[n]^T."""
    if isinstance(grads, GradientStream):
        g = grads.samples
    else:
        g = GradientStream(grads).samples
    n = g.shape[0]
    if n == 0:
        raise EmptyStream("cannot estimate a moment from zero samples")
    m = g.T @ g / n
    return MomentMatrix(0.5 * (m + m.T))


def psd_project(m):
    """Symmetrize, clamp negative eigenvalues to zero, reassemble.

    Sampled or hand-built moments may be indefinite; the solvers require
    PSD input, so this is the canonical sanitizer.
    """
    s = linalg.symmetrize(m)
    w, v = linalg.eigh(s)
    wc = np.maximum(w, 0.0)
    out = (v * wc) @ v.T
    return MomentMatrix(0.5 * (out + out.T))


def estimate_lag_moments(grads, max_lag):
    """Symmetrized empirical autocorrelations up to max_lag.

    Only fully overlapping index pairs enter each average (no
    zero-padding), so each lag is an unbiased estimate under
    wide-sense stationarity.
    """
    if not isinstance(grads, GradientStream):
        grads = GradientStream(grads)
    g = grads.samples
    n = g.shape[0]
    if n <= max_lag:
        raise InsufficientSamples(
            f"need more than {max_lag} samples, got {n}")
    lags = []
    for k in range(max_lag + 1):
        c = g[k:].T @ g[:n - k] / (n - k)
        lags.append(0.5 * (c + c.T))
    return LagMoments(lags)


def estimate_validation_moments(train, val, max_lag):
    """Symmetrized cross-moments between validation and training streams.

    Streams of unequal length are truncated to their common length and
    aligned by index before averaging.
    """
    if not isinstance(train, GradientStream):
        train = GradientStream(train)
    if not isinstance(val, GradientStream):
        val = GradientStream(val)
    if train.dim != val.dim:
        raise DimensionMismatch("train and validation streams differ in dim")
    n = min(len(train), len(val))
    if n <= max_lag:
        raise InsufficientSamples(
            f"need more than {max_lag} aligned samples, got {n}")
    gt = train.samples[:n]
    gv = val.samples[:n]
    lags = []
    for k in range(max_lag + 1):
        c = gv[k:].T @ gt[:n - k] / (n - k)
        lags.append(0.5 * (c + c.T))
    return LagMoments(lags)


# ---------------------------------------------------------------------------
# serialization


def matrix_to_json(m):
    m = as_matrix(m)
    return {"dim": int(m.shape[0]), "rows": [list(map(float, r)) for r in m]}


def matrix_from_json(obj):
    rows = np.asarray(obj["rows"], dtype=float)
    if rows.shape != (obj["dim"], obj["dim"]):
        raise DimensionMismatch("JSON matrix dim does not match rows")
    return rows


def save_matrix_csv(path, m):
    m = as_matrix(m)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in m:
            writer.writerow([repr(float(x)) for x in row])


def load_matrix_csv(path):
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    return np.asarray(rows, dtype=float)


def lag_moments_to_json(r):
    return {
        "dim": int(r.dim),
        "max_lag": int(r.max_lag),
        "lags": [matrix_to_json(m) for m in r.lags],
    }


def lag_moments_from_json(obj):
    lags = [matrix_from_json(m) for m in obj["lags"]]
    return LagMoments(lags)
