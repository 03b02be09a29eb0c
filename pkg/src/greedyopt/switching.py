"""K-choice hyperparameter switching and its optimizer specializations.

The switch keeps K candidate hyperparameter settings warm in parallel
(momenta, and for Adam second moments), scores each candidate every
step with its greedy objective J_k, applies the winner's update, and
stabilizes itself by halving the momenta after the selected objective
has been negative for five consecutive steps.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .errors import (DimensionMismatch, InvalidBudget, NonFinite,
                     NonPositiveCost, ZeroMatrix)

__all__ = [
    "SwitchState", "StepRecord",
    "Identity", "Dense", "BlockDiag", "Kronecker", "DiagonalCost",
    "init_sgdm_state", "init_adam_state", "init_muon_state",
    "sgdm_switch_step", "adam_switch_step", "muon_switch_step",
    "hysteresis_update", "precond_objective", "precond_optimal_lr",
    "rmsprop_objective", "orthogonalize", "muon_objective",
    "validation_objective",
]

HYSTERESIS_WINDOW = 5
HYSTERESIS_DECAY = 0.5
# Quintic Newton-Schulz coefficients (15/8, -10/8, 3/8): the map
# x -> (15x - 10x^3 + 3x^5)/8 converges monotonically to 1 on (0, 1],
# so five iterations land within 5e-3 of the exact polar factor for
# singular values >= 0.1 after the Frobenius pre-scaling.
NS5_COEFFS = (1.875, -1.25, 0.375)


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class SwitchState:
    """Per-candidate optimizer state for one K-choice switch."""

    kind: str                       # "sgdm" | "adam" | "muon"
    candidates: tuple               # beta | (beta1, beta2) | mu
    momenta: tuple                  # per-candidate arrays
    second_moments: tuple = ()      # adam only
    hysteresis_count: int = 0
    last_selected: int = 0
    steps_taken: int = 0
    window: int = HYSTERESIS_WINDOW
    decay: float = HYSTERESIS_DECAY


@dataclass(frozen=True)
class StepRecord:
    step: int
    selected: int
    objectives: tuple
    update: np.ndarray


def init_sgdm_state(candidates, dim, window=HYSTERESIS_WINDOW,
                    decay=HYSTERESIS_DECAY):
    if len(candidates) < 1:
        raise InvalidBudget("need at least one candidate")
    return SwitchState("sgdm", tuple(float(b) for b in candidates),
                       tuple(np.zeros(dim) for _ in candidates),
                       window=window, decay=decay)


def init_adam_state(candidates, dim, window=HYSTERESIS_WINDOW,
                    decay=HYSTERESIS_DECAY):
    if len(candidates) < 1:
        raise InvalidBudget("need at least one candidate")
    cands = tuple((float(b1), float(b2)) for b1, b2 in candidates)
    return SwitchState("adam", cands,
                       tuple(np.zeros(dim) for _ in cands),
                       tuple(np.zeros(dim) for _ in cands),
                       window=window, decay=decay)


def init_muon_state(candidates, shape, window=HYSTERESIS_WINDOW,
                    decay=HYSTERESIS_DECAY):
    if len(candidates) < 1:
        raise InvalidBudget("need at least one candidate")
    return SwitchState("muon", tuple(float(m) for m in candidates),
                       tuple(np.zeros(shape) for _ in candidates),
                       window=window, decay=decay)


def hysteresis_update(state, j_selected):
    """Count consecutive negative selected objectives; halve on overflow.

    Strictly negative J increments the counter, anything else resets
    it. Reaching the window halves every candidate momentum (second
    moments are left untouched) and resets the counter.
    """
    if j_selected < 0.0:
        count = state.hysteresis_count + 1
    else:
        count = 0
    if count >= state.window:
        momenta = tuple(state.decay * m for m in state.momenta)
        return replace(state, momenta=momenta, hysteresis_count=0)
    return replace(state, hysteresis_count=count)


def _argmax_lowest(values):
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def sgdm_switch_step(state, g, eta):
    """One switch step of momentum SGD over the candidate betas.

    Candidate momenta follow m_k <- beta_k m_k + g; the winner of
    J_k = sqrt(1 - beta_k^2) g.m_k drives the parameter update.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != state.momenta[0].shape:
        raise DimensionMismatch("gradient dim does not match switch state")
    momenta = tuple(b * m + g for b, m in zip(state.candidates, state.momenta))
    objs = tuple(math.sqrt(1.0 - b * b) * float(np.dot(g, m))
                 for b, m in zip(state.candidates, momenta))
    k = _argmax_lowest(objs)
    delta = -eta * momenta[k]
    new_state = replace(state, momenta=momenta, last_selected=k,
                        steps_taken=state.steps_taken + 1)
    new_state = hysteresis_update(new_state, objs[k])
    record = StepRecord(state.steps_taken, k, objs, delta)
    return delta, record, new_state


def adam_switch_step(state, g, eta, eps=1e-8):
    """One switch step of Adam over candidate (beta1, beta2) pairs.

    Follows the unbias-corrected recursion m <- b1 m + (1-b1) g,
    v <- b2 v + (1-b2) g^2, u = m/(sqrt(v)+eps), scored by
    J_k = a_k g.u_k with a_k = sqrt((1+b1)/((1-b1) sum_j 1/(c_j+eps))).
    """
    g = np.asarray(g, dtype=float)
    if g.shape != state.momenta[0].shape:
        raise DimensionMismatch("gradient dim does not match switch state")
    if not np.all(np.isfinite(g)):
        raise NonFinite("gradient contains NaN or Inf")
    momenta = []
    seconds = []
    objs = []
    updates = []
    for (b1, b2), m, v in zip(state.candidates, state.momenta,
                              state.second_moments):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        c = np.sqrt(v) + eps
        u = m / c
        w = float(np.sum(1.0 / c))
        a = math.sqrt((1.0 + b1) / ((1.0 - b1) * w))
        momenta.append(m)
        seconds.append(v)
        updates.append(u)
        objs.append(a * float(np.dot(g, u)))
    objs = tuple(objs)
    k = _argmax_lowest(objs)
    delta = -eta * updates[k]
    new_state = replace(state, momenta=tuple(momenta),
                        second_moments=tuple(seconds), last_selected=k,
                        steps_taken=state.steps_taken + 1)
    new_state = hysteresis_update(new_state, objs[k])
    record = StepRecord(state.steps_taken, k, objs, delta)
    return delta, record, new_state


def muon_switch_step(state, g, eta):
    """One switch step of Muon over candidate momentum factors mu.

    Candidate buffers follow B_k <- mu_k B_k + G; each is scored by the
    alignment of the gradient with the orthogonalized buffer.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != state.momenta[0].shape:
        raise DimensionMismatch("gradient shape does not match switch state")
    buffers = tuple(mu * b + g for mu, b in zip(state.candidates, state.momenta))
    orthos = [orthogonalize(b, method="exact") for b in buffers]
    objs = tuple(float(np.sum(g * o)) for o in orthos)
    k = _argmax_lowest(objs)
    delta = -eta * orthos[k]
    new_state = replace(state, momenta=buffers, last_selected=k,
                        steps_taken=state.steps_taken + 1)
    new_state = hysteresis_update(new_state, objs[k])
    record = StepRecord(state.steps_taken, k, objs, delta)
    return delta, record, new_state


# ---------------------------------------------------------------------------
# preconditioned objectives


@dataclass(frozen=True)
class Identity:
    dim: int

    def apply(self, vec):
        return np.asarray(vec, dtype=float)

    def trace_norm(self):
        return float(self.dim)


@dataclass(frozen=True)
class Dense:
    p: np.ndarray

    def apply(self, vec):
        return np.asarray(self.p, dtype=float) @ np.asarray(vec, dtype=float)

    def trace_norm(self):
        return float(np.trace(np.asarray(self.p, dtype=float)))


@dataclass(frozen=True)
class BlockDiag:
    blocks: tuple

    def apply(self, vec):
        vec = np.asarray(vec, dtype=float)
        out = np.empty_like(vec)
        i = 0
        for blk in self.blocks:
            blk = np.asarray(blk, dtype=float)
            n = blk.shape[0]
            out[i:i + n] = blk @ vec[i:i + n]
            i += n
        if i != vec.size:
            raise DimensionMismatch("block sizes do not cover the vector")
        return out

    def trace_norm(self):
        return float(sum(np.trace(np.asarray(b, dtype=float))
                         for b in self.blocks))


@dataclass(frozen=True)
class Kronecker:
    factors: tuple

    def apply(self, vec):
        dims = [np.asarray(f).shape[0] for f in self.factors]
        vec = np.asarray(vec, dtype=float)
        if vec.size != int(np.prod(dims)):
            raise DimensionMismatch("Kronecker factor dims do not match vector")
        t = vec.reshape(dims)
        for axis, f in enumerate(self.factors):
            t = np.tensordot(np.asarray(f, dtype=float), t, axes=([1], [axis]))
            t = np.moveaxis(t, 0, axis)
        return t.reshape(-1)

    def trace_norm(self):
        return float(np.prod([np.asarray(f).shape[0] for f in self.factors]))


@dataclass(frozen=True)
class DiagonalCost:
    c: tuple

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if np.any(c <= 0):
            raise NonPositiveCost("all costs must be > 0")
        object.__setattr__(self, "c", tuple(float(x) for x in c))

    def apply(self, vec):
        return np.asarray(vec, dtype=float) / np.asarray(self.c, dtype=float)

    def trace_norm(self):
        return float(np.sum(1.0 / np.asarray(self.c, dtype=float)))


def precond_objective(beta, precond, g, m_unnorm):
    """Preconditioned momentum objective sqrt(1-beta^2)/sqrt(tr) g.(P m)."""
    g = np.asarray(g, dtype=float)
    m_unnorm = np.asarray(m_unnorm, dtype=float)
    if g.shape != m_unnorm.shape:
        raise DimensionMismatch("gradient and momentum differ in shape")
    pm = precond.apply(m_unnorm)
    tr = precond.trace_norm()
    return math.sqrt(1.0 - beta * beta) / math.sqrt(tr) * float(np.dot(g, pm))


def precond_optimal_lr(beta_star, budget, precond):
    """Budget-saturating learning rate for a preconditioned one-pole filter."""
    if not budget > 0:
        raise InvalidBudget("budget must be positive")
    tr = precond.trace_norm()
    return math.sqrt(budget * (1.0 + beta_star) / ((1.0 - beta_star) * tr))


def rmsprop_objective(costs):
    """Diagonal-scaling objective sum c_j / sqrt(sum 1/c_j)."""
    c = np.asarray(costs, dtype=float)
    if np.any(c <= 0):
        raise NonPositiveCost("all costs must be > 0")
    return float(np.sum(c)) / math.sqrt(float(np.sum(1.0 / c)))


# ---------------------------------------------------------------------------
# orthogonalization


def orthogonalize(m, method="exact"):
    """Orthogonal polar factor of a rectangular matrix.

    "exact" computes U V^T from the eigendecomposition of m^T m;
    "ns5" runs five quintic Newton-Schulz iterations on the input
    pre-scaled by 1/(||m||_F + 1e-7), a cheap approximation whose
    ground truth is the exact factor.
    """
    m = np.asarray(m, dtype=float)
    if method == "exact":
        norm = np.linalg.norm(m)
        if norm == 0.0:
            raise ZeroMatrix("cannot orthogonalize the zero matrix")
        transposed = m.shape[0] < m.shape[1]
        x = m.T if transposed else m
        w, v = linalg.eigh(x.T @ x)
        w = np.maximum(w, 0.0)
        s = np.sqrt(w)
        keep = s > 1e-12 * s[0]
        vk = v[:, keep]
        out = (x @ vk) / s[keep] @ vk.T
        return out.T if transposed else out
    if method == "ns5":
        a, b, c = NS5_COEFFS
        x = m / (np.linalg.norm(m) + 1e-7)
        transposed = x.shape[0] < x.shape[1]
        if transposed:
            x = x.T
        for _ in range(5):
            xxt = x @ x.T
            x = a * x + (b * xxt + c * (xxt @ xxt)) @ x
        return x.T if transposed else x
    raise ValueError(f"unknown method {method!r}")


def muon_objective(mu, g_now, b_momentum):
    """Alignment of the gradient with the orthogonalized momentum buffer.

    b_momentum must already be the running buffer built with this mu
    (B = G + mu * B_prev); mu itself does not enter the formula.
    """
    g_now = np.asarray(g_now, dtype=float)
    b_momentum = np.asarray(b_momentum, dtype=float)
    if g_now.shape != b_momentum.shape:
        raise DimensionMismatch("gradient and buffer differ in shape")
    return float(np.sum(g_now * orthogonalize(b_momentum, method="exact")))


# ---------------------------------------------------------------------------
# validation-aware objective


def validation_objective(kind, hyper, g_val_now, update_direction):
    """Greedy objective scored against the validation gradient.

    The functional form matches the named training objective, but the
    dot product uses g_val while the update direction stays
    training-driven. ``hyper`` carries the normalization inputs:
    {"beta"} for sgdm, {"beta1", "w"} for adam (w = sum_j 1/c_j),
    nothing for muon.
    """
    g_val_now = np.asarray(g_val_now, dtype=float)
    update_direction = np.asarray(update_direction, dtype=float)
    if g_val_now.shape != update_direction.shape:
        raise DimensionMismatch("validation gradient and update differ in shape")
    dot = float(np.sum(g_val_now * update_direction))
    if kind == "sgdm":
        b = hyper["beta"]
        return math.sqrt(1.0 - b * b) * dot
    if kind == "adam":
        b1 = hyper["beta1"]
        w = hyper["w"]
        return math.sqrt((1.0 + b1) / ((1.0 - b1) * w)) * dot
    if kind == "muon":
        return dot
    raise ValueError(f"unknown objective kind {kind!r}")
