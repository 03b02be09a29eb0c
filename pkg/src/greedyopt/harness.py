"""Desk-scale experiment battery.

Toy losses (elliptic quadratic, Rosenbrock, least squares, a tiny MLP
on a synthetic two-Gaussian task), equal-power comparator sampling, and
switch-optimizer training runs, all emitting Trace objects that
serialize to CSV.
"""

import csv
import hashlib
import json
import math
import os

import numpy as np

from .errors import ConfigError, Divergence, InvalidBudget
from .moments import MomentMatrix, psd_project
from .stateless import (Diagonal, Frobenius, Lyapunov, Spectral, solve)
from .switching import adam_switch_step, init_adam_state, init_sgdm_state, \
    sgdm_switch_step

__all__ = ["Trace", "sample_equal_power_family", "run_quadratic",
           "run_rosenbrock", "run_mlp_switch", "run_mlp_adam_fixed",
           "make_two_gaussian_dataset", "write_trace_csv",
           "write_manifest"]

DIVERGENCE_GUARD = 1e12


class Trace:
    """Per-step record of one run: losses, optional selections, metadata."""

    def __init__(self, loss, selected=None, meta=None):
        self.loss = [float(x) for x in loss]
        self.selected = None if selected is None else [int(s) for s in selected]
        self.meta = dict(meta or {})
        self.steps = len(self.loss)


def sample_equal_power_family(budget, d, count, seed):
    """Random PSD comparators, each rescaled to Frobenius norm sqrt(B)."""
    if not budget > 0:
        raise InvalidBudget("budget must be positive")
    rng = np.random.default_rng(seed)
    root_b = math.sqrt(budget)
    out = []
    while len(out) < count:
        m = rng.standard_normal((d, d))
        q = psd_project(0.5 * (m + m.T)).entries
        fro = np.linalg.norm(q, "fro")
        if fro == 0.0:
            continue
        out.append(q * (root_b / fro))
    return out


def run_quadratic(a, q, theta0, eta, steps):
    """Preconditioned gradient descent on the quadratic loss 0.5 t^T A t.

    Records the loss before any update and after each of the `steps`
    updates (steps + 1 entries).
    """
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    theta = np.asarray(theta0, dtype=float).copy()
    losses = []
    for i in range(steps + 1):
        loss = 0.5 * float(theta @ (a @ theta))
        if not np.isfinite(loss) or loss > DIVERGENCE_GUARD:
            raise Divergence(f"quadratic run diverged at step {i}")
        losses.append(loss)
        if i < steps:
            theta = theta - eta * (q @ (a @ theta))
    return Trace(losses, meta={"kind": "quadratic", "eta": eta})


def _rosenbrock_loss_grad(theta, a, b):
    x, y = theta
    loss = (a - x) ** 2 + b * (y - x * x) ** 2
    gx = -2.0 * (a - x) - 4.0 * b * x * (y - x * x)
    gy = 2.0 * b * (y - x * x)
    return loss, np.array([gx, gy])


def _region_from_config(cfg):
    family = cfg.get("family", "frobenius")
    if family == "frobenius":
        return Frobenius(cfg.get("budget", 1.0))
    if family == "spectral":
        return Spectral(cfg.get("tau", 1.0), cfg.get("lambda", 1.0))
    if family == "lyapunov":
        return Lyapunov(cfg.get("budget", 1.0))
    if family == "diagonal":
        return Diagonal(cfg.get("budget", 1.0), tuple(cfg["costs"]))
    raise ConfigError(f"unknown family {family!r}")


def run_rosenbrock(config):
    """Stateless-family descent on the Rosenbrock valley.

    The moment matrix is re-estimated online from the instantaneous
    gradient outer product with EMA smoothing; a zero moment yields a
    zero optimizer and the step is skipped.
    """
    a = config.get("a", 1.0)
    b = config.get("b", 100.0)
    theta = np.asarray(config.get("start", (-1.2, 1.0)), dtype=float).copy()
    steps = config.get("steps", 500)
    eta = config.get("eta", 1e-3)
    ema = config.get("ema", 0.9)
    region = _region_from_config(config)
    sigma = np.zeros((2, 2))
    losses = []
    for i in range(steps + 1):
        loss, g = _rosenbrock_loss_grad(theta, a, b)
        if not np.isfinite(loss) or loss > DIVERGENCE_GUARD:
            raise Divergence(f"rosenbrock run diverged at step {i}")
        losses.append(loss)
        if i == steps:
            break
        sigma = ema * sigma + (1.0 - ema) * np.outer(g, g)
        clean = psd_project(sigma)
        q = solve(region, clean).q
        theta = theta - eta * (q @ g)
        if not np.all(np.isfinite(theta)):
            raise Divergence(f"rosenbrock parameters nonfinite at step {i}")
    return Trace(losses, meta={"kind": "rosenbrock", "eta": eta})


# ---------------------------------------------------------------------------
# tiny MLP on a synthetic two-Gaussian task


def make_two_gaussian_dataset(seed, n=800, dim=20, separation=2.0):
    """Two isotropic Gaussian clusters, balanced binary labels."""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    half = n // 2
    x0 = rng.standard_normal((half, dim)) - separation * direction
    x1 = rng.standard_normal((n - half, dim)) + separation * direction
    x = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(half, dtype=int),
                        np.ones(n - half, dtype=int)])
    perm = rng.permutation(n)
    return x[perm], y[perm]


def _init_mlp(seed, dim, hidden, classes):
    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal((dim, hidden)) / math.sqrt(dim)
    b1 = np.zeros(hidden)
    w2 = rng.standard_normal((hidden, classes)) / math.sqrt(hidden)
    b2 = np.zeros(classes)
    return _pack(w1, b1, w2, b2), (dim, hidden, classes)


def _pack(w1, b1, w2, b2):
    return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


def _unpack(theta, shape):
    dim, hidden, classes = shape
    i = 0
    w1 = theta[i:i + dim * hidden].reshape(dim, hidden); i += dim * hidden
    b1 = theta[i:i + hidden]; i += hidden
    w2 = theta[i:i + hidden * classes].reshape(hidden, classes)
    i += hidden * classes
    b2 = theta[i:i + classes]
    return w1, b1, w2, b2


def _mlp_loss_grad(theta, shape, x, y):
    """Softmax cross-entropy loss and flat gradient for dense-tanh-dense."""
    w1, b1, w2, b2 = _unpack(theta, shape)
    n = x.shape[0]
    h_pre = x @ w1 + b1
    h = np.tanh(h_pre)
    logits = h @ w2 + b2
    logits = logits - logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    probs = expl / expl.sum(axis=1, keepdims=True)
    loss = -float(np.mean(np.log(probs[np.arange(n), y] + 1e-300)))
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    gw2 = h.T @ dlogits
    gb2 = dlogits.sum(axis=0)
    dh = dlogits @ w2.T
    dpre = dh * (1.0 - h * h)
    gw1 = x.T @ dpre
    gb1 = dpre.sum(axis=0)
    return loss, _pack(gw1, gb1, gw2, gb2)


def _mlp_setup(config):
    hidden = config.get("hidden", 16)
    dim = config.get("dim", 20)
    classes = 2
    seed = config.get("seed", 0)
    x, y = make_two_gaussian_dataset(seed, n=config.get("n", 800), dim=dim)
    theta, shape = _init_mlp(seed + 1, dim, hidden, classes)
    batch = config.get("batch", 128)
    steps = config.get("steps", 200)
    batch_rng = np.random.default_rng(seed + 2)
    batches = [batch_rng.choice(x.shape[0], size=batch, replace=False)
               for _ in range(steps)]
    return x, y, theta, shape, batches, steps


def run_mlp_switch(config):
    """Train the tiny MLP with the K-choice Adam (or SGD+M) switch."""
    x, y, theta, shape, batches, steps = _mlp_setup(config)
    eta = config.get("eta", 0.05)
    eps = config.get("eps", 1e-8)
    optimizer = config.get("optimizer", "adam")
    candidates = config.get("candidates")
    if not candidates:
        raise ConfigError("config must list at least one candidate")
    if optimizer == "adam":
        state = init_adam_state([tuple(c) for c in candidates], theta.size)
    elif optimizer == "sgdm":
        state = init_sgdm_state([float(c) for c in candidates], theta.size)
    else:
        raise ConfigError(f"unsupported optimizer {optimizer!r}")
    losses = []
    selected = []
    for i in range(steps):
        idx = batches[i]
        loss, g = _mlp_loss_grad(theta, shape, x[idx], y[idx])
        if not np.isfinite(loss) or loss > DIVERGENCE_GUARD:
            raise Divergence(f"mlp run diverged at step {i}")
        losses.append(loss)
        if optimizer == "adam":
            delta, record, state = adam_switch_step(state, g, eta, eps)
        else:
            delta, record, state = sgdm_switch_step(state, g, eta)
        selected.append(record.selected)
        theta = theta + delta
    final_loss, _ = _mlp_loss_grad(theta, shape, x, y)
    losses.append(final_loss)
    selected.append(selected[-1] if selected else 0)
    return Trace(losses, selected, meta={"kind": "mlp", "eta": eta})


def run_mlp_adam_fixed(config, beta1, beta2):
    """Plain single-setting Adam baseline on the identical MLP task.

    Independent code path implementing the same unbias-corrected
    recursion (including the negative-objective hysteresis halving) so
    the single-candidate switch can be checked against it bit for bit.
    """
    x, y, theta, shape, batches, steps = _mlp_setup(config)
    eta = config.get("eta", 0.05)
    eps = config.get("eps", 1e-8)
    m = np.zeros(theta.size)
    v = np.zeros(theta.size)
    neg_count = 0
    losses = []
    for i in range(steps):
        idx = batches[i]
        loss, g = _mlp_loss_grad(theta, shape, x[idx], y[idx])
        if not np.isfinite(loss) or loss > DIVERGENCE_GUARD:
            raise Divergence(f"adam baseline diverged at step {i}")
        losses.append(loss)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        c = np.sqrt(v) + eps
        u = m / c
        w = float(np.sum(1.0 / c))
        a = math.sqrt((1.0 + beta1) / ((1.0 - beta1) * w))
        j = a * float(np.dot(g, u))
        delta = -eta * u
        theta = theta + delta
        if j < 0.0:
            neg_count += 1
        else:
            neg_count = 0
        if neg_count >= 5:
            m = 0.5 * m
            neg_count = 0
    final_loss, _ = _mlp_loss_grad(theta, shape, x, y)
    losses.append(final_loss)
    return Trace(losses, meta={"kind": "mlp-adam-fixed", "eta": eta})


# ---------------------------------------------------------------------------
# output


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss", "selected"])
        for i, loss in enumerate(trace.loss):
            sel = "" if trace.selected is None else trace.selected[i]
            writer.writerow([i, repr(loss), sel])


def write_manifest(outdir, config):
    blob = json.dumps(config, sort_keys=True).encode()
    manifest = {
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "seed": config.get("seed", 0),
        "config": config,
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path
