import numpy as np
import pytest

from greedyopt.endpoints import (KernelMatrix, LeastSquaresProblem,
                                 analytic_endpoint, flow_endpoint,
                                 flow_stability_bound, min_norm_interpolant,
                                 oak_kernel)
from greedyopt.errors import (DimensionMismatch, InconsistentTarget,
                              NonConvergence)


def test_analytic_endpoint_weighted_min_norm():
    prob = LeastSquaresProblem(np.array([[1.0, 1.0]]), np.array([2.0]))
    theta = analytic_endpoint(np.diag([1.0, 3.0]), prob)
    assert np.allclose(theta, [0.5, 1.5], atol=1e-12)


def test_analytic_endpoint_identity_is_pseudoinverse():
    prob = LeastSquaresProblem(np.array([[1.0, 1.0]]), np.array([2.0]))
    theta = analytic_endpoint(np.eye(2), prob)
    assert np.allclose(theta, [1.0, 1.0], atol=1e-12)


def test_analytic_endpoint_square_invertible():
    rng = np.random.default_rng(0)
    jac = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    y = rng.standard_normal(3)
    a = rng.standard_normal((3, 3))
    q = a @ a.T + np.eye(3)
    prob = LeastSquaresProblem(jac, y)
    theta = analytic_endpoint(q, prob)
    assert np.allclose(theta, np.linalg.solve(jac, y), atol=1e-8)


def test_analytic_endpoint_shape_checked():
    prob = LeastSquaresProblem(np.ones((1, 2)), np.ones(1))
    with pytest.raises(DimensionMismatch):
        analytic_endpoint(np.eye(3), prob)


def test_flow_matches_analytic_hand_instance():
    prob = LeastSquaresProblem(np.array([[1.0, 1.0]]), np.array([2.0]))
    q = np.diag([1.0, 3.0])
    theta = flow_endpoint(q, prob, step=0.1, tol=1e-10)
    assert np.allclose(theta, analytic_endpoint(q, prob), atol=1e-6)


def test_flow_zero_optimizer_stays_at_origin():
    prob = LeastSquaresProblem(np.array([[1.0, 1.0]]), np.array([2.0]))
    theta = flow_endpoint(np.zeros((2, 2)), prob, step=0.1)
    assert np.array_equal(theta, np.zeros(2))


def test_flow_unstable_step_raises():
    prob = LeastSquaresProblem(np.array([[1.0, 1.0]]), np.array([2.0]))
    q = np.eye(2)
    bound = flow_stability_bound(q, prob)
    with pytest.raises(NonConvergence):
        flow_endpoint(q, prob, step=1.5 * bound, max_iters=5000)


def test_flow_stability_bound_value():
    prob = LeastSquaresProblem(np.array([[1.0, 1.0]]), np.array([2.0]))
    # J Q J^T = [2] for Q = I, so the Euler bound is 1
    assert flow_stability_bound(np.eye(2), prob) == pytest.approx(1.0)


def test_oak_kernel_identity_is_gram():
    rng = np.random.default_rng(1)
    jac = rng.standard_normal((4, 3))
    k = oak_kernel(jac, np.eye(3))
    assert np.allclose(k.k, jac @ jac.T, atol=1e-12)


def test_oak_kernel_rank_one():
    jac = np.outer([1.0, 2.0], [3.0, 0.0, 1.0])
    k = oak_kernel(jac, np.eye(3))
    assert np.linalg.matrix_rank(k.k) == 1


def test_oak_kernel_diagonal():
    k = oak_kernel(np.eye(2), np.diag([2.0, 3.0]))
    assert np.allclose(k.k, np.diag([2.0, 3.0]), atol=0)


def test_min_norm_interpolant_identity_kernel():
    alpha, norm_sq = min_norm_interpolant(np.eye(3), [1.0, -2.0, 0.5])
    assert np.allclose(alpha, [1.0, -2.0, 0.5], atol=1e-12)
    assert norm_sq == pytest.approx(5.25)


def test_min_norm_interpolant_rank_deficient_support():
    alpha, norm_sq = min_norm_interpolant(np.diag([2.0, 0.0]), [4.0, 0.0])
    assert np.allclose(alpha, [2.0, 0.0], atol=1e-12)
    assert norm_sq == pytest.approx(8.0)


def test_min_norm_interpolant_inconsistent_target():
    with pytest.raises(InconsistentTarget):
        min_norm_interpolant(np.diag([2.0, 0.0]), [4.0, 1.0])


def test_min_norm_interpolant_ridge_path():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((3, 3))
    k = a @ a.T + np.eye(3)
    y = rng.standard_normal(3)
    alpha, norm_sq = min_norm_interpolant(k, y, ridge=1e-6)
    assert np.allclose(alpha, np.linalg.solve(k + 1e-6 * np.eye(3), y),
                       atol=1e-8)
    assert norm_sq >= 0.0


def test_interpolant_matches_exponential_flow_limit():
    rng = np.random.default_rng(3)
    jac = rng.standard_normal((2, 2))
    a = rng.standard_normal((2, 2))
    q = a @ a.T + 0.5 * np.eye(2)
    k = oak_kernel(jac, q)
    z = rng.standard_normal(2)
    y = k.k @ z
    alpha, _ = min_norm_interpolant(k, y)
    # u(t) = (I - exp(-K t)) y approaches the interpolant's predictions
    w, v = np.linalg.eigh(k.k)
    t = 50.0 / max(w.min(), 1e-12)
    u_inf = y - (v * np.exp(-w * t)) @ (v.T @ y)
    assert np.allclose(k.k @ alpha, u_inf, atol=1e-8)


def test_same_minimal_loss_across_optimizers():
    rng = np.random.default_rng(4)
    jac = rng.standard_normal((3, 5))
    w = rng.standard_normal(5)
    y = jac @ w
    prob = LeastSquaresProblem(jac, y)
    for _ in range(5):
        a = rng.standard_normal((5, 5))
        q = a @ a.T + 0.1 * np.eye(5)
        theta = analytic_endpoint(q, prob)
        assert np.linalg.norm(jac @ theta - y) <= 1e-8 * np.linalg.norm(y)


def test_problem_validation():
    with pytest.raises(DimensionMismatch):
        LeastSquaresProblem(np.ones((2, 3)), np.ones(3))
