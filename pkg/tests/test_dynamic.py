import math

import numpy as np
import pytest

from greedyopt import dynamic
from greedyopt.dynamic import (MatrixFilter, OnePoleSpec, adam_objective,
                               filter_from_json, filter_to_json,
                               hilbert_inner, one_pole_response,
                               sgdm_objective, sgdm_optimal_lr, solve_dynamic)
from greedyopt.errors import DimensionMismatch, InvalidBudget, NonFinite
from greedyopt.moments import LagMoments, estimate_lag_moments
from greedyopt.stateless import Frobenius, Spectral, solve


def test_hilbert_inner_lag_zero_only():
    f = MatrixFilter([np.eye(2)])
    r = LagMoments([np.diag([3.0, 1.0]), np.eye(2)])
    assert hilbert_inner(f, r) == 4.0


def test_hilbert_inner_disjoint_support():
    a = MatrixFilter([np.eye(2), np.zeros((2, 2))])
    b = MatrixFilter([np.zeros((2, 2)), np.eye(2)])
    assert hilbert_inner(a, b) == 0.0


def test_one_pole_hilbert_norm_geometric():
    # (1-b)^2/(1-b^2) * Tr(I_2) = (0.25/0.75)*2 = 2/3 in the untruncated
    # limit; a K=200 truncation is within 1e-10 of it.
    f = one_pole_response(OnePoleSpec(1.0, 0.5, np.eye(2)), max_lag=200)
    assert f.hilbert_norm_sq() == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_one_pole_impulse_limit():
    f = one_pole_response(OnePoleSpec(1.0, 0.0, np.eye(3)), max_lag=4)
    assert np.array_equal(f.taps[0], np.eye(3))
    for t in f.taps[1:]:
        assert np.array_equal(t, np.zeros((3, 3)))


def test_one_pole_scalar_taps():
    f = one_pole_response(OnePoleSpec(2.0, 0.5, np.eye(1)), max_lag=2)
    assert [t[0, 0] for t in f.taps] == [1.0, 0.5, 0.25]


def test_one_pole_truncated_norm_formula():
    eta, beta, k = 1.7, 0.8, 30
    p = np.diag([1.0, 2.0])
    f = one_pole_response(OnePoleSpec(eta, beta, p), max_lag=k)
    expect = (eta ** 2 * (1 - beta) ** 2 / (1 - beta ** 2)
              * np.sum(p * p) * (1 - beta ** (2 * (k + 1))))
    assert f.hilbert_norm_sq() == pytest.approx(expect, rel=1e-12)


def test_one_pole_spec_validation():
    with pytest.raises(InvalidBudget):
        OnePoleSpec(1.0, 1.0, np.eye(2))
    with pytest.raises(InvalidBudget):
        OnePoleSpec(-1.0, 0.5, np.eye(2))


def test_solve_dynamic_lag_zero_reduction():
    r = LagMoments([np.diag([3.0, 1.0])])
    filt = solve_dynamic(Frobenius(4.0), r)
    stateless = solve(Frobenius(4.0), np.diag([3.0, 1.0]))
    assert len(filt) == 1
    assert np.allclose(filt.taps[0], stateless.q, atol=1e-12)


def test_solve_dynamic_global_budget_split():
    r = LagMoments([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    filt = solve_dynamic(Frobenius(1.0), r)
    assert np.allclose(filt.taps[0], np.diag([1.0, 0.0]) / math.sqrt(2.0),
                       atol=1e-14)
    assert np.allclose(filt.taps[1], np.diag([0.0, 1.0]) / math.sqrt(2.0),
                       atol=1e-14)
    assert filt.hilbert_norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_solve_dynamic_zero_moments():
    r = LagMoments([np.zeros((2, 2)), np.zeros((2, 2))])
    filt = solve_dynamic(Frobenius(1.0), r)
    for t in filt.taps:
        assert np.array_equal(t, np.zeros((2, 2)))


def test_solve_dynamic_per_lag_decouples():
    rng = np.random.default_rng(0)
    lags = []
    for _ in range(3):
        a = rng.standard_normal((3, 3))
        lags.append(a @ a.T / 3)
    r = LagMoments(lags)
    regions = [Frobenius(1.0), Spectral(1.0, 0.5), Frobenius(2.0)]
    filt = solve_dynamic(regions, r)
    for reg, lag, tap in zip(regions, r.lags, filt.taps):
        assert np.allclose(tap, solve(reg, lag).q, atol=1e-12)


def test_solve_dynamic_region_count_checked():
    r = LagMoments([np.eye(2), np.eye(2)])
    with pytest.raises(DimensionMismatch):
        solve_dynamic([Frobenius(1.0)], r)


# ---------------------------------------------------------------------------
# momentum objectives


def _momentum_trajectory(stream, beta):
    m = np.zeros_like(stream[0])
    out = []
    for g in stream:
        m = g + beta * m
        out.append(m.copy())
    return out


def test_sgdm_objective_constant_stream_monotone():
    g = np.array([1.0, 0.0])
    stream = [g] * 2000
    values = {}
    for beta in (0.01, 0.5, 0.99):
        m = _momentum_trajectory(stream, beta)[-1]
        values[beta] = sgdm_objective(beta, g, m)
    assert values[0.01] < values[0.5] < values[0.99]
    # steady state J(b) = sqrt((1+b)/(1-b)) for a unit constant stream
    ratio = values[0.99] / values[0.01]
    expect = math.sqrt(1.99 / 0.01) / math.sqrt(1.01 / 0.99)
    assert ratio == pytest.approx(expect, rel=1e-6)
    assert 13.9 < ratio < 14.1


def test_sgdm_objective_alternating_stream_monotone():
    g = np.array([1.0, -1.0])
    stream = [((-1.0) ** n) * g for n in range(400)]
    values = {}
    for beta in (0.01, 0.5, 0.99):
        m = _momentum_trajectory(stream, beta)[-1]
        values[beta] = sgdm_objective(beta, stream[-1], m)
    assert values[0.01] > values[0.5] > values[0.99]


def test_sgdm_objective_orthogonal():
    assert sgdm_objective(0.5, [1.0, 0.0], [0.0, 2.0]) == 0.0


def test_sgdm_objective_scale_invariant_argmax():
    rng = np.random.default_rng(1)
    stream = [rng.standard_normal(3) for _ in range(50)]
    betas = np.linspace(0.05, 0.95, 19)

    def argmax_for(scale):
        vals = []
        for b in betas:
            m = _momentum_trajectory([scale * g for g in stream], b)[-1]
            vals.append(sgdm_objective(b, scale * stream[-1], m))
        return int(np.argmax(vals))

    assert argmax_for(1.0) == argmax_for(7.5)


def test_sgdm_optimal_lr():
    assert sgdm_optimal_lr(0.9, 1.0, 100) == pytest.approx(math.sqrt(0.19))
    assert sgdm_optimal_lr(0.0, 4.0, 4) == pytest.approx(1.0)
    assert sgdm_optimal_lr(0.5, 4.0, 4) == pytest.approx(math.sqrt(3.0))
    with pytest.raises(InvalidBudget):
        sgdm_optimal_lr(0.5, -1.0, 4)


def test_adam_objective_plug_in():
    j = adam_objective(0.5, [1.0], [1.0], [1.0], eps=0.0)
    assert j == pytest.approx(math.sqrt(3.0), abs=1e-12)


def test_adam_objective_zero_gradient():
    assert adam_objective(0.9, [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]) == 0.0


def test_adam_objective_fixed_point_prefers_large_beta1():
    g = np.array([0.3, -2.0, 1.1])
    j_small = adam_objective(0.8, g, g, g * g, eps=0.0)
    j_large = adam_objective(0.99, g, g, g * g, eps=0.0)
    assert j_large > j_small


def test_adam_objective_rejects_negative_v():
    with pytest.raises(NonFinite):
        adam_objective(0.9, [1.0], [1.0], [-1.0])


# ---------------------------------------------------------------------------
# stream-level identities


def test_hilbert_power_matches_time_average():
    rng = np.random.default_rng(2)
    d, n, rho = 3, 4000, 0.5
    g = np.zeros((n, d))
    x = rng.standard_normal(d)
    for i in range(n):
        x = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(d)
        g[i] = x
    max_lag = 5
    r = estimate_lag_moments(g, max_lag)
    filt = one_pole_response(OnePoleSpec(1.0, 0.6, np.eye(d)), max_lag)
    inner = hilbert_inner(filt, r)
    total = 0.0
    for i in range(n):
        conv = sum(filt.taps[k] @ g[i - k]
                   for k in range(min(max_lag, i) + 1))
        total += float(g[i] @ conv)
    time_avg = total / n
    # the two averages differ only in edge normalization, O(K/N)
    assert time_avg == pytest.approx(inner, rel=0.01)


def test_budgeted_one_pole_grid_matches_objective_argmax():
    # On a positively correlated stream the budget-saturating one-pole
    # power P(beta) and the streaming objective average land on the same
    # beta grid cell.
    rng = np.random.default_rng(3)
    d, n, rho, budget = 4, 4000, 0.6, 1.0
    g = np.zeros((n, d))
    x = rng.standard_normal(d)
    for i in range(n):
        x = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(d)
        g[i] = x
    r = estimate_lag_moments(g, 64)
    betas = np.arange(0.005, 1.0, 0.005)
    power = []
    for b in betas:
        eta = sgdm_optimal_lr(b, budget, d)
        power.append(hilbert_inner(one_pole_response(
            OnePoleSpec(eta, b, np.eye(d))), r))
    obj = []
    m = np.zeros((betas.size, d))
    totals = np.zeros(betas.size)
    for i in range(n):
        m = g[i] + betas[:, None] * m
        totals += np.sqrt(1.0 - betas ** 2) * (m @ g[i])
    obj = totals / n
    b_power = betas[int(np.argmax(power))]
    b_obj = betas[int(np.argmax(obj))]
    assert 0.01 < b_power < 0.99
    assert abs(b_power - b_obj) <= 0.005 + 1e-12


def test_filter_json_roundtrip():
    f = MatrixFilter([np.eye(2), 0.5 * np.eye(2)])
    back = filter_from_json(filter_to_json(f))
    assert len(back) == 2
    for a, b in zip(f.taps, back.taps):
        assert np.array_equal(a, b)


def test_truncation_default_exported():
    assert dynamic.DEFAULT_TRUNCATION == 64
    assert dynamic.DEFAULT_EPS == 1e-8
