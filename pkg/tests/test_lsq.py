import numpy as np
import pytest

from grcsolve.oracle import dense_least_squares
from grcsolve.solvers import minimize_residual, solve_gram


def test_collinear_single_vector():
    hb = np.array([1.0, -2.0, 0.5])
    step = minimize_residual([hb], 2.0 * hb)
    np.testing.assert_allclose(step.alpha, [2.0], rtol=1e-15)
    assert np.linalg.norm(step.residual) <= 1e-15
    assert not step.degenerate


def test_orthogonal_residual_gives_zero_coefficients():
    images = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])]
    r = np.array([0.0, 0.0, 3.0])
    step = minimize_residual(images, r)
    np.testing.assert_array_equal(step.alpha, [0.0, 0.0])
    np.testing.assert_array_equal(step.residual, r)


@pytest.mark.parametrize("seed", range(20))
def test_matches_dense_least_squares(seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((10, 2))
    r = rng.standard_normal(10)
    step = minimize_residual(list(B.T), r)
    np.testing.assert_allclose(step.alpha, dense_least_squares(B, r), rtol=1e-10, atol=1e-12)


def test_cached_gram_is_used():
    images = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    step = minimize_residual(images, np.array([1.0, 1.0]), gram=np.eye(2) * 2.0,
                             rhs=np.array([1.0, 1.0]))
    np.testing.assert_allclose(step.alpha, [0.5, 0.5])


def test_dependent_oldest_vector_is_dropped():
    v = np.array([1.0, 2.0, 3.0])
    w = np.array([0.0, 1.0, -1.0])
    images = [v, w, 2.0 * v]
    r = v + w
    step = minimize_residual(images, r)
    assert not step.degenerate
    assert step.alpha[2] == 0.0
    np.testing.assert_allclose(step.alpha[:2], [1.0, 1.0], rtol=1e-12)


def test_all_zero_images_are_degenerate():
    alpha, used, degenerate = solve_gram(np.zeros((2, 2)), np.zeros(2))
    assert degenerate and used == 0
    np.testing.assert_array_equal(alpha, [0.0, 0.0])


def test_scaling_does_not_trigger_dropping():
    # widely different lengths but independent directions
    images = [np.array([1e-9, 0.0, 0.0]), np.array([0.0, 1e9, 0.0])]
    r = np.array([1.0, 1.0, 0.0])
    step = minimize_residual(images, r)
    np.testing.assert_allclose(step.alpha, [1e9, 1e-9], rtol=1e-12)
