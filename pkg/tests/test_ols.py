import numpy as np
import pytest

from app.core.exceptions import DimensionMismatch, RankDeficient, ZeroColumn
from app.estimation.ols import column_scalings, fit_ols
from app.models.models import DesignMatrix, ResponseVector


def test_fit_intercept_only_is_sample_mean():
    fit = fit_ols(DesignMatrix(np.ones((3, 1))), ResponseVector([1.0, 2.0, 3.0]))

    np.testing.assert_allclose(fit.beta_hat, [2.0])
    np.testing.assert_allclose(fit.residuals, [-1.0, 0.0, 1.0], atol=1e-12)


def test_fit_saturated_model():
    fit = fit_ols(DesignMatrix(np.eye(2)), ResponseVector([3.5, -1.25]))

    np.testing.assert_allclose(fit.beta_hat, [3.5, -1.25])
    np.testing.assert_array_equal(fit.residuals, [0.0, 0.0])


def test_fit_exact_three_four_five():
    fit = fit_ols(DesignMatrix([[3.0], [4.0]]), ResponseVector([3.0, 4.0]))

    np.testing.assert_allclose(fit.beta_hat, [1.0])
    np.testing.assert_allclose(fit.scaling.diag, [5.0])
    np.testing.assert_array_equal(fit.r0_hat, [[1.0]])


@pytest.mark.parametrize(
    "columns, expected",
    [
        ([[3.0], [4.0]], [5.0]),
        (np.ones((7, 1)), [np.sqrt(7)]),
        (np.eye(2), [1.0, 1.0]),
    ],
)
def test_column_scalings(columns, expected):
    np.testing.assert_allclose(column_scalings(DesignMatrix(columns)).diag, expected)


def test_zero_column_rejected():
    X = DesignMatrix(np.column_stack([np.ones(4), np.zeros(4)]), ("const", "empty"))

    with pytest.raises(ZeroColumn, match="empty"):
        fit_ols(X, ResponseVector(np.arange(4.0)))


def test_rank_deficient_design():
    x = np.arange(1.0, 7.0)
    X = DesignMatrix(np.column_stack([x, 2.0 * x]))

    with pytest.raises(RankDeficient):
        fit_ols(X, ResponseVector(np.ones(6)))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        fit_ols(DesignMatrix(np.ones((4, 1))), ResponseVector(np.ones(3)))


def test_design_needs_at_least_p_rows():
    with pytest.raises(DimensionMismatch):
        DesignMatrix(np.ones((2, 3)))


def test_normal_equations_hold(rng):
    n, p = 300, 4
    X = DesignMatrix(np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))]))
    Y = ResponseVector(X.entries @ np.array([1.0, -2.0, 0.5, 3.0]) + rng.normal(size=n))

    fit = fit_ols(X, Y)

    bound = 1e-8 * np.linalg.norm(Y.values) * fit.scaling.diag.max()
    assert np.abs(X.entries.T @ fit.residuals).max() <= bound


def test_scaling_equivariance(rng):
    n = 120
    base = np.column_stack([np.ones(n), rng.normal(size=n), np.arange(n, dtype=float)])
    Y = ResponseVector(base @ np.array([1.0, 2.0, 0.01]) + rng.normal(size=n))
    scaled = base.copy()
    scaled[:, 1] *= 250.0

    first = fit_ols(DesignMatrix(base), Y)
    second = fit_ols(DesignMatrix(scaled), Y)

    np.testing.assert_allclose(second.scaled_beta, first.scaled_beta, rtol=1e-10)
    np.testing.assert_allclose(second.residuals, first.residuals, rtol=1e-10, atol=1e-10)


def test_r0_has_unit_diagonal(rng):
    X = DesignMatrix(rng.normal(size=(50, 3)) * np.array([1e-3, 1.0, 1e4]))
    fit = fit_ols(X, ResponseVector(rng.normal(size=50)))

    np.testing.assert_array_equal(np.diag(fit.r0_hat), np.ones(3))
    np.testing.assert_array_equal(fit.r0_hat, fit.r0_hat.T)
    assert np.all(np.abs(fit.r0_hat) <= 1.0)
