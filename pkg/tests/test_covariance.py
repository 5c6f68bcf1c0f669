import numpy as np
import pytest
from scipy import linalg

from app.core.exceptions import LagOutOfRange, NotPositiveDefinite, SingularR0
from app.estimation.covariance import (
    covariance_estimate, covariance_from_autocov, lag_cross_moment, symmetric_inverse_sqrt,
    whitening_factor
)
from app.estimation.kernels import autocovariance, get_kernel, make_bandwidth
from app.estimation.ols import column_scalings, fit_ols
from app.models.models import (
    Bandwidth, CovarianceEstimate, DesignMatrix, KernelId, ResponseVector, ScalingMatrix
)
from tests.conftest import dense_covariance


def _random_problem(rng, n, p):
    X = DesignMatrix(np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))]))
    # AR(1)-ошибки, чтобы автоковариации на ненулевых лагах были заметны
    eps = np.empty(n)
    eps[0] = rng.normal()
    for i in range(1, n):
        eps[i] = 0.6 * eps[i - 1] + rng.normal()
    Y = ResponseVector(X.entries @ rng.normal(size=p) + eps)
    return X, fit_ols(X, Y)


def _relative_frobenius(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_lag_cross_moment_of_ones():
    X = DesignMatrix(np.ones((3, 1)))

    moment = lag_cross_moment(X, column_scalings(X), 1)

    np.testing.assert_allclose(moment.matrix, [[2.0 / 3.0]])


def test_lag_cross_moment_zero_lag_has_unit_diagonal(rng):
    X = DesignMatrix(rng.normal(size=(40, 3)))

    moment = lag_cross_moment(X, column_scalings(X), 0)

    np.testing.assert_array_equal(np.diag(moment.matrix), np.ones(3))


def test_lag_cross_moment_shifted_columns():
    X = DesignMatrix(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]))

    moment = lag_cross_moment(X, column_scalings(X), 1)

    # элемент (0, 1): (1·1 + 0·0 + 1·1)/2, элемент (1, 0): (0·0 + 1·1 + 0·0)/2
    assert moment.matrix[0, 1] == pytest.approx(1.0)
    assert moment.matrix[1, 0] == pytest.approx(0.5)


def test_lag_cross_moment_lag_out_of_range():
    X = DesignMatrix(np.ones((3, 1)))

    with pytest.raises(LagOutOfRange):
        lag_cross_moment(X, column_scalings(X), 3)


def test_intercept_only_lag_zero_window():
    X = DesignMatrix(np.ones((5, 1)))
    fit = fit_ols(X, ResponseVector([1.0, 4.0, 2.0, 5.0, 3.0]))
    kernel = get_kernel("paper")

    est = covariance_estimate(fit, X, kernel, make_bandwidth(1.0, kernel, X.n))

    gamma0 = fit.residuals @ fit.residuals / X.n
    np.testing.assert_allclose(est.matrix, [[gamma0]])
    np.testing.assert_allclose(est.matrix, dense_covariance(X, fit, "paper", 1.0))


def test_zero_residuals_give_zero_covariance():
    X = DesignMatrix(np.column_stack([np.ones(6), np.arange(6.0)]))
    fit = fit_ols(X, ResponseVector(2.0 + 3.0 * np.arange(6.0)))
    kernel = get_kernel("paper")

    est = covariance_estimate(fit, X, kernel, make_bandwidth(2.0, kernel, X.n))

    np.testing.assert_array_equal(est.matrix, np.zeros((2, 2)))
    assert est.psd


def test_matches_dense_oracle(rng):
    for _ in range(100):
        n = int(rng.integers(10, 201))
        p = int(rng.integers(1, 5))
        kernel_id = rng.choice(["paper", "bartlett", "rectangular"])
        kernel = get_kernel(kernel_id)
        X, fit = _random_problem(rng, n, p)
        h = make_bandwidth(float(rng.uniform(0.5, 12.0)), kernel, n)

        est = covariance_estimate(fit, X, kernel, h)
        dense = dense_covariance(X, fit, kernel_id, h.h)

        assert _relative_frobenius(est.matrix, dense) <= 1e-10


def test_column_scale_invariance(rng):
    X, fit = _random_problem(rng, 150, 3)
    entries = X.entries.copy()
    entries[:, 2] *= 1e3
    scaled = DesignMatrix(entries)
    Y = ResponseVector(fit.residuals + X.entries @ fit.beta_hat)
    scaled_fit = fit_ols(scaled, Y)
    kernel = get_kernel("bartlett")
    h = make_bandwidth(6.0, kernel, 150)

    first = covariance_estimate(fit, X, kernel, h).matrix
    second = covariance_estimate(scaled_fit, scaled, kernel, h).matrix

    assert _relative_frobenius(second, first) <= 1e-10


def test_lag_zero_window_is_gamma0_times_inverse_r0(rng):
    X, fit = _random_problem(rng, 100, 3)
    kernel = get_kernel("bartlett")

    est = covariance_estimate(fit, X, kernel, make_bandwidth(1.0, kernel, 100))

    gamma0 = fit.residuals @ fit.residuals / 100
    np.testing.assert_allclose(est.matrix, gamma0 * np.linalg.inv(fit.r0_hat), rtol=1e-10)


def test_bartlett_estimate_is_psd(rng):
    for _ in range(100):
        n = int(rng.integers(20, 201))
        p = int(rng.integers(1, 5))
        X, fit = _random_problem(rng, n, p)
        kernel = get_kernel("bartlett")

        est = covariance_estimate(fit, X, kernel, make_bandwidth(float(rng.uniform(1.0, 15.0)), kernel, n))

        assert est.psd
        assert est.min_eigenvalue >= -1e-8 * abs(np.trace(est.matrix)) / p


def test_singular_r0():
    X = DesignMatrix(np.column_stack([np.ones(4), np.arange(4.0)]))
    scaling = column_scalings(X)
    kernel = get_kernel("paper")

    with pytest.raises(SingularR0):
        covariance_from_autocov(
            X, scaling, np.ones((2, 2)), autocovariance(np.arange(4.0), 1), kernel, Bandwidth(1.0, 0)
        )


def test_covariance_requires_enough_lags():
    X = DesignMatrix(np.ones((50, 1)))
    kernel = get_kernel("paper")

    with pytest.raises(LagOutOfRange):
        covariance_from_autocov(
            X, ScalingMatrix([np.sqrt(50)]), np.eye(1), autocovariance(np.ones(50), 2), kernel, Bandwidth(5.0, 4)
        )


def test_whitening_identity():
    np.testing.assert_allclose(symmetric_inverse_sqrt(np.eye(3)), np.eye(3))


def test_whitening_diagonal():
    est = CovarianceEstimate(
        matrix=np.diag([4.0, 9.0]), bandwidth=Bandwidth(1.0, 0), kernel_id=KernelId.PAPER,
        psd=True, n=10, min_eigenvalue=4.0,
    )

    np.testing.assert_allclose(whitening_factor(est), np.diag([0.5, 1.0 / 3.0]))


def test_whitening_random_spd(rng):
    a = rng.normal(size=(3, 3))
    spd = a @ a.T + 0.5 * np.eye(3)

    root = symmetric_inverse_sqrt(spd)

    np.testing.assert_allclose(root @ spd @ root, np.eye(3), atol=1e-8)
    np.testing.assert_allclose(root, linalg.fractional_matrix_power(spd, -0.5).real, atol=1e-8)


def test_whitening_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite) as info:
        symmetric_inverse_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))

    assert info.value.eigenvalue == pytest.approx(-1.0)
    assert "bartlett" in str(info.value)
