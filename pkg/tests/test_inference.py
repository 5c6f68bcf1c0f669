import math

import numpy as np
import pytest
from scipy import integrate, stats

from app.core.exceptions import EmptyIndexSet, InvalidConfig, NonPositiveVariance, NotPositiveDefinite
from app.estimation.covariance import covariance_estimate
from app.estimation.inference import chi_square_sf, joint_test, normal_cdf, t_test
from app.estimation.kernels import get_kernel, make_bandwidth
from app.estimation.ols import fit_ols
from app.models.models import (
    Bandwidth, CovarianceEstimate, DesignMatrix, KernelId, RegressionFit, ResponseVector, ScalingMatrix
)


def _fit(beta, d):
    p = len(beta)
    return RegressionFit(
        beta_hat=np.asarray(beta, dtype=float),
        residuals=np.zeros(10),
        scaling=ScalingMatrix(d),
        r0_hat=np.eye(p),
    )


def _estimate(matrix):
    matrix = np.asarray(matrix, dtype=float)
    return CovarianceEstimate(
        matrix=matrix, bandwidth=Bandwidth(1.0, 0), kernel_id=KernelId.PAPER, psd=True,
        n=10, min_eigenvalue=float(np.linalg.eigvalsh(matrix)[0]),
    )


def _normal_pdf(x):
    return math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi)


def test_normal_cdf_values():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.96) == pytest.approx(0.9750021, abs=1e-7)
    assert normal_cdf(-8.0) < 1e-14


def test_normal_cdf_matches_integration():
    for x in np.linspace(-6.0, 6.0, 200):
        tail, _ = integrate.quad(_normal_pdf, -np.inf, x, epsabs=1e-13)
        assert normal_cdf(x) == pytest.approx(tail, abs=1e-7)
        assert normal_cdf(-x) == pytest.approx(1.0 - normal_cdf(x), abs=1e-12)


def test_chi_square_sf_values():
    assert chi_square_sf(0.0, 3) == 1.0
    assert chi_square_sf(3.841, 1) == pytest.approx(0.05, abs=1e-4)
    assert chi_square_sf(2.0 * math.log(20.0), 2) == pytest.approx(0.05, rel=1e-12)


@pytest.mark.parametrize("dof", [1, 2, 3, 5])
def test_chi_square_sf_matches_integration(dof):
    norm = 2.0 ** (dof / 2.0) * math.gamma(dof / 2.0)

    def pdf(t):
        return t ** (dof / 2.0 - 1.0) * math.exp(-t / 2.0) / norm

    for x in np.linspace(0.05, 25.0, 50):
        tail, _ = integrate.quad(pdf, x, np.inf, epsabs=1e-13)
        assert chi_square_sf(x, dof) == pytest.approx(tail, abs=1e-7)


def test_chi_square_sf_rejects_bad_arguments():
    with pytest.raises(InvalidConfig):
        chi_square_sf(1.0, 0)
    with pytest.raises(InvalidConfig):
        chi_square_sf(-1.0, 2)


def test_t_test_zero_estimate():
    result = t_test(_fit([0.0], [10.0]), _estimate([[25.0]]), 0)

    assert result.statistic == 0.0
    assert result.p_value == 1.0
    assert not result.reject_at_5pct


def test_t_test_arithmetic():
    result = t_test(_fit([0.5], [10.0]), _estimate([[25.0]]), 0)

    assert result.statistic == pytest.approx(1.0)
    assert result.p_value == pytest.approx(0.3173105, abs=1e-7)


def test_t_test_non_positive_variance():
    with pytest.raises(NonPositiveVariance, match="bartlett"):
        t_test(_fit([0.5, 1.0], [10.0, 1.0]), _estimate([[0.0, 0.0], [0.0, 1.0]]), 0)


def test_t_test_index_out_of_range():
    with pytest.raises(InvalidConfig):
        t_test(_fit([0.5], [10.0]), _estimate([[25.0]]), 1)


def test_joint_test_identity():
    result = joint_test(_fit([3.0, 4.0, 9.0], [1.0, 1.0, 1.0]), _estimate(np.eye(3)), [0, 1])

    assert result.statistic == pytest.approx(25.0)
    assert result.degrees == 2
    np.testing.assert_allclose(result.components, [3.0, 4.0])


def test_joint_test_zero_estimates():
    result = joint_test(_fit([0.0, 0.0], [2.0, 3.0]), _estimate([[2.0, 0.5], [0.5, 1.0]]), [0, 1])

    assert result.statistic == 0.0
    assert result.p_value == 1.0


def test_joint_test_p_value_at_critical_value():
    # Ξ = 5.991 при единичной ковариации и компонентах (√5.991, 0)
    result = joint_test(_fit([math.sqrt(5.991), 0.0], [1.0, 1.0]), _estimate(np.eye(2)), [0, 1])

    assert result.p_value == pytest.approx(0.05, abs=1e-4)


def test_joint_test_equals_quadratic_form(rng):
    for _ in range(20):
        a = rng.normal(size=(4, 4))
        spd = a @ a.T + 0.1 * np.eye(4)
        beta = rng.normal(size=4)
        d = rng.uniform(1.0, 20.0, size=4)
        indices = [0, 2, 3]

        result = joint_test(_fit(beta, d), _estimate(spd), indices)

        v = (d * beta)[indices]
        expected = v @ np.linalg.solve(spd[np.ix_(indices, indices)], v)
        assert result.statistic == pytest.approx(expected, rel=1e-8)


def test_joint_test_index_errors():
    fit, est = _fit([1.0, 2.0], [1.0, 1.0]), _estimate(np.eye(2))

    with pytest.raises(EmptyIndexSet):
        joint_test(fit, est, [])
    with pytest.raises(InvalidConfig):
        joint_test(fit, est, [1, 1])
    with pytest.raises(InvalidConfig):
        joint_test(fit, est, [0, 5])


def test_joint_test_indefinite_submatrix():
    with pytest.raises(NotPositiveDefinite):
        joint_test(_fit([1.0, 2.0], [1.0, 1.0]), _estimate([[1.0, 2.0], [2.0, 1.0]]), [0, 1])


def test_p_values_invariant_to_column_scale(rng):
    n = 200
    base = np.column_stack([np.ones(n), rng.normal(size=n), rng.normal(size=n)])
    Y = ResponseVector(base @ np.array([1.0, 0.3, -0.2]) + rng.normal(size=n))
    scaled = base * np.array([1.0, 40.0, 1e-3])
    kernel = get_kernel("paper")
    h = make_bandwidth(5.0, kernel, n)

    results = []
    for entries in (base, scaled):
        X = DesignMatrix(entries)
        fit = fit_ols(X, Y)
        est = covariance_estimate(fit, X, kernel, h)
        results.append((t_test(fit, est, 1), joint_test(fit, est, [1, 2])))

    assert results[1][0].statistic == pytest.approx(results[0][0].statistic, rel=1e-8)
    assert results[1][0].p_value == pytest.approx(results[0][0].p_value, rel=1e-8)
    assert results[1][1].statistic == pytest.approx(results[0][1].statistic, rel=1e-8)


@pytest.mark.slow
def test_t_statistic_is_standard_normal_under_iid_errors():
    n, replications = 1000, 2000
    X = DesignMatrix(np.ones((n, 1)))
    kernel = get_kernel("paper")
    h = make_bandwidth(1.0, kernel, n)
    rng = np.random.default_rng(7)

    statistics = []
    for _ in range(replications):
        fit = fit_ols(X, ResponseVector(rng.normal(size=n)))
        statistics.append(t_test(fit, covariance_estimate(fit, X, kernel, h), 0).statistic)
    statistics = np.array(statistics)

    assert stats.kstest(statistics, "norm").pvalue > 0.01
    assert 0.035 <= np.mean(np.abs(statistics) > 1.959964) <= 0.065
