"""Tests for the phase-invariant error metrics.

The closed-form distance is cross-checked against a brute-force minimization
over a fine grid of phases, which serves as the independent oracle.
"""

import numpy as np
import pytest

from phaseforge import matrix_phase_error, phase_invariant_dist, \
    subspace_distance


def _grid_dist(xhat, x, grid=20001):
    """Brute-force min over theta of ||x e^{j theta} - xhat||."""
    thetas = np.linspace(0, 2 * np.pi, grid)
    return min(np.linalg.norm(x * np.exp(1j * t) - xhat) for t in thetas)


def test_matches_grid_search_oracle_complex():
    rng = np.random.Generator(np.random.Philox(key=0))
    for _ in range(20):
        x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        xhat = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        d = phase_invariant_dist(xhat, x)
        assert abs(d - _grid_dist(xhat, x)) < 1e-6


def test_real_case_is_min_over_signs():
    rng = np.random.Generator(np.random.Philox(key=1))
    for _ in range(20):
        x = rng.standard_normal(6)
        xhat = rng.standard_normal(6)
        d = phase_invariant_dist(xhat, x)
        assert np.isclose(d, min(np.linalg.norm(xhat - x),
                                 np.linalg.norm(xhat + x)))


def test_zero_iff_equal_up_to_phase():
    x = np.array([1.0 + 2j, -3j, 0.5])
    assert phase_invariant_dist(x * np.exp(0.7j), x) < 1e-12
    assert phase_invariant_dist(-x, x) < 1e-12
    assert phase_invariant_dist(x + 1e-3, x) > 1e-4


def test_symmetry():
    x = np.array([1.0, 2.0, 3.0])
    xhat = np.array([0.5, -1.0, 2.5])
    assert np.isclose(phase_invariant_dist(xhat, x),
                      phase_invariant_dist(x, xhat))


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        phase_invariant_dist(np.ones(3), np.ones(4))


def test_matrix_phase_error_columnwise_phases():
    # Each column may carry its own phase, so flipping one column is free.
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    Xhat = X.copy()
    Xhat[:, 1] *= -1
    assert matrix_phase_error(Xhat, X) < 1e-12
    # A global Frobenius-normalized error on a genuinely wrong estimate.
    Xhat2 = X + np.array([[0.0, 0.0], [0.0, 1.0]])
    expected = phase_invariant_dist(Xhat2[:, 1], X[:, 1]) / np.linalg.norm(X)
    assert np.isclose(matrix_phase_error(Xhat2, X), expected)


def test_matrix_phase_error_zero_truth_raises():
    with pytest.raises(ValueError):
        matrix_phase_error(np.ones((3, 2)), np.zeros((3, 2)))


def test_subspace_distance_basics():
    U = np.eye(4)[:, :2]
    assert subspace_distance(U, U) < 1e-12
    # same span, different basis
    Q = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    assert subspace_distance(U @ Q, U) < 1e-12
    # orthogonal complement
    V = np.eye(4)[:, 2:]
    assert np.isclose(subspace_distance(V, U), 1.0)


def test_subspace_distance_is_sine_of_principal_angle():
    t = 0.4
    U = np.array([[1.0], [0.0]])
    V = np.array([[np.cos(t)], [np.sin(t)]])
    assert np.isclose(subspace_distance(V, U), np.sin(t))


def test_subspace_distance_requires_orthonormal_columns():
    U = np.eye(3)[:, :2]
    with pytest.raises(ValueError):
        subspace_distance(2 * U, U)
