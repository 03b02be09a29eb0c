import json

import numpy as np
import pytest

from greedyopt import moments
from greedyopt.errors import (DimensionMismatch, EmptyStream,
                              InsufficientSamples, NonFinite)


def test_estimate_moment_single_sample():
    m = moments.estimate_moment([[1.0, 0.0]])
    assert np.array_equal(m.entries, [[1.0, 0.0], [0.0, 0.0]])


def test_estimate_moment_symmetric_average():
    m = moments.estimate_moment([[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(m.entries, 0.5 * np.eye(2), atol=0)


def test_estimate_moment_empty_stream():
    with pytest.raises(EmptyStream):
        moments.estimate_moment(np.zeros((0, 2)))


def test_estimate_moment_dimension_mismatch():
    with pytest.raises((DimensionMismatch, ValueError)):
        moments.estimate_moment([[1.0, 0.0], [1.0]])


def test_psd_project_clamps():
    m = moments.psd_project(np.diag([1.0, -1.0]))
    assert np.allclose(m.entries, np.diag([1.0, 0.0]), atol=1e-14)


def test_psd_project_idempotent_on_psd():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    psd = a @ a.T
    out = moments.psd_project(psd)
    assert np.allclose(out.entries, psd, atol=1e-12 * np.abs(psd).max())


def test_psd_project_nilpotent_input():
    out = moments.psd_project(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(out.entries, [[0.25, 0.25], [0.25, 0.25]], atol=1e-12)


def test_psd_project_rejects_nonfinite():
    with pytest.raises(NonFinite):
        moments.psd_project(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_estimate_moment_is_psd_fixed_point():
    rng = np.random.default_rng(1)
    g = rng.standard_normal((20, 3))
    m = moments.estimate_moment(g)
    again = moments.psd_project(m.entries)
    assert np.allclose(again.entries, m.entries, atol=1e-12)


def test_lag_moments_constant_stream():
    g = np.array([2.0, 1.0])
    r = moments.estimate_lag_moments([g] * 6, 2)
    assert r.max_lag == 2
    for k in range(3):
        assert np.allclose(r.lags[k], np.outer(g, g), atol=1e-14)


def test_lag_moments_alternating_stream():
    g = np.array([1.0, -2.0])
    stream = [((-1.0) ** n) * g for n in range(8)]
    r = moments.estimate_lag_moments(stream, 1)
    assert np.allclose(r.lags[0], np.outer(g, g), atol=1e-14)
    assert np.allclose(r.lags[1], -np.outer(g, g), atol=1e-14)


def test_lag_zero_matches_moment():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((15, 4))
    r = moments.estimate_lag_moments(g, 0)
    m = moments.estimate_moment(g)
    assert np.array_equal(r.lags[0], m.entries)


def test_lag_moments_insufficient_samples():
    with pytest.raises(InsufficientSamples):
        moments.estimate_lag_moments(np.ones((3, 2)), 3)


def test_validation_moments_self():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((12, 3))
    own = moments.estimate_lag_moments(g, 2)
    cross = moments.estimate_validation_moments(g, g, 2)
    for a, b in zip(own.lags, cross.lags):
        assert np.allclose(a, b, atol=1e-12)


def test_validation_moments_constant_cross():
    tr = [[1.0, 0.0]] * 4
    va = [[0.0, 1.0]] * 4
    r = moments.estimate_validation_moments(tr, va, 0)
    assert np.allclose(r.lags[0], [[0.0, 0.5], [0.5, 0.0]], atol=1e-14)


def test_validation_moments_truncate_to_common_length():
    tr = [[1.0, 0.0]] * 6
    va = [[0.0, 1.0]] * 4
    r = moments.estimate_validation_moments(tr, va, 0)
    assert np.allclose(r.lags[0], [[0.0, 0.5], [0.5, 0.0]], atol=1e-14)


def test_validation_moments_dim_mismatch():
    with pytest.raises(DimensionMismatch):
        moments.estimate_validation_moments(np.ones((4, 2)), np.ones((4, 3)), 0)


def test_matrix_json_roundtrip():
    m = np.array([[1.0, 0.25], [0.25, 2.0]])
    obj = moments.matrix_to_json(m)
    assert obj["dim"] == 2
    back = moments.matrix_from_json(json.loads(json.dumps(obj)))
    assert np.array_equal(back, m)


def test_matrix_csv_roundtrip(tmp_path):
    m = np.array([[1.0 / 3.0, 0.1], [0.1, 7.0]])
    path = tmp_path / "m.csv"
    moments.save_matrix_csv(path, m)
    assert np.array_equal(moments.load_matrix_csv(path), m)


def test_lag_moments_json_roundtrip():
    r = moments.LagMoments([np.eye(2), np.diag([0.0, 1.0])])
    back = moments.lag_moments_from_json(
        json.loads(json.dumps(moments.lag_moments_to_json(r))))
    assert back.max_lag == 1
    for a, b in zip(r.lags, back.lags):
        assert np.array_equal(a, b)
