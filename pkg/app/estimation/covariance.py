"""
Оценка C_n асимптотической ковариации D(n)(β̂ − β).

C_n накапливается из матриц B_{k,n}:

    D(n)^{-1} X^t Γ̂* X D(n)^{-1} = Σ_k K(k/h) γ̂*_k B_{k,n},

поэтому матрица n×n никогда не строится.
"""

import logging

import numpy as np
from scipy import linalg

from app.core.exceptions import DimensionMismatch, LagOutOfRange, NotPositiveDefinite, SingularR0
from app.estimation.kernels import autocovariance, kernel_weights, lag_window
from app.estimation.ols import RANK_TOLERANCE
from app.models.models import (
    AutocovSequence, Bandwidth, CovarianceEstimate, DesignMatrix, LagCrossMoment,
    RegressionFit, ScalingMatrix, TaperKernel
)


logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-8
WHITENING_TOLERANCE = 1e-12


def lag_cross_moment(X: DesignMatrix, scaling: ScalingMatrix, k: int) -> LagCrossMoment:
    """
    B_{k,n}: элемент (j, l) равен Σ_{m=1}^{n−k} x_{m,j} x_{m+k,l} / (d_j d_l).

    B_{−k,n} получается транспонированием.

    Raises:
        LagOutOfRange: Если k вне [0, n − 1]
    """
    n = X.n
    if not 0 <= k <= n - 1:
        raise LagOutOfRange(f"Лаг {k} вне диапазона [0, {n - 1}]")

    x = X.entries
    matrix = (x[: n - k].T @ x[k:]) / np.outer(scaling.diag, scaling.diag)
    if k == 0:
        matrix = (matrix + matrix.T) / 2
        np.fill_diagonal(matrix, 1.0)
    return LagCrossMoment(k=k, matrix=matrix)


def _psd_threshold(matrix: np.ndarray) -> float:
    p = matrix.shape[0]
    return abs(np.trace(matrix)) / p


def covariance_from_autocov(
    X: DesignMatrix,
    scaling: ScalingMatrix,
    r0_hat: np.ndarray,
    acov: AutocovSequence,
    kernel: TaperKernel,
    h: Bandwidth,
) -> CovarianceEstimate:
    """
    C_n = R̂(0)^{-1} M R̂(0)^{-1}, где M = Σ_{|k| ≤ L} K(k/h) γ̂_k B_{k,n}.

    Автоковариации могут быть посчитаны по остаткам или (в симуляциях)
    по истинным ошибкам.

    Raises:
        SingularR0: Если R̂(0) численно вырождена
        LagOutOfRange: Если автоковариаций меньше, чем нужно окну
    """
    window = lag_window(h.h, kernel, X.n)
    if acov.max_lag < window:
        raise LagOutOfRange(f"Автоковариации посчитаны до лага {acov.max_lag}, нужно до {window}")

    weights = kernel_weights(kernel, h, window) * acov.values[: window + 1]

    middle = weights[0] * lag_cross_moment(X, scaling, 0).matrix
    for k in range(1, window + 1):
        if weights[k] == 0.0:
            continue
        b = lag_cross_moment(X, scaling, k).matrix
        middle += weights[k] * (b + b.T)

    eigenvalues = linalg.eigvalsh(r0_hat)
    if eigenvalues[0] <= RANK_TOLERANCE * eigenvalues[-1]:
        raise SingularR0(f"R̂(0) численно вырождена: λ_min = {eigenvalues[0]:.3e}")

    factor = linalg.cho_factor(r0_hat)
    left = linalg.cho_solve(factor, middle)
    matrix = linalg.cho_solve(factor, left.T)
    matrix = (matrix + matrix.T) / 2

    min_eigenvalue = float(linalg.eigvalsh(matrix)[0])
    psd = min_eigenvalue >= -PSD_TOLERANCE * _psd_threshold(matrix)
    if not psd:
        logger.warning(
            "C_n не положительно определена (λ_min = %.3e, ядро %s, h=%.4g)",
            min_eigenvalue, kernel.id.value, h.h,
        )

    return CovarianceEstimate(
        matrix=matrix,
        bandwidth=h,
        kernel_id=kernel.id,
        psd=psd,
        n=X.n,
        min_eigenvalue=min_eigenvalue,
    )


def covariance_estimate(
    fit: RegressionFit,
    X: DesignMatrix,
    kernel: TaperKernel,
    h: Bandwidth,
) -> CovarianceEstimate:
    """
    Оценка C_n по остаткам МНК.

    Args:
        fit: Результат МНК, полученный на X
        X: Матрица плана
        kernel: Ядро сглаживания
        h: Ширина окна

    Returns:
        CovarianceEstimate: Симметричная p×p матрица C_n и флаг psd

    Raises:
        DimensionMismatch: Если fit получен не на этом плане
        SingularR0: Если R̂(0) численно вырождена
    """
    if fit.n != X.n or fit.p != X.p:
        raise DimensionMismatch("Результат МНК не соответствует матрице плана")

    acov = autocovariance(fit.residuals, lag_window(h.h, kernel, X.n))
    return covariance_from_autocov(X, fit.scaling, fit.r0_hat, acov, kernel, h)


def symmetric_inverse_sqrt(matrix: np.ndarray) -> np.ndarray:
    """
    Симметричный корень V·diag(λ^{-1/2})·V^t.

    Raises:
        NotPositiveDefinite: Если λ_min ≤ 1e-12·trace/p
    """
    eigenvalues, vectors = linalg.eigh(matrix)
    threshold = WHITENING_TOLERANCE * _psd_threshold(matrix)
    if eigenvalues[0] <= threshold:
        raise NotPositiveDefinite(
            f"Матрица ковариации не положительно определена: λ_min = {eigenvalues[0]:.3e}",
            eigenvalue=float(eigenvalues[0]),
        )
    return (vectors / np.sqrt(eigenvalues)) @ vectors.T


def whitening_factor(est: CovarianceEstimate) -> np.ndarray:
    """C_n^{-1/2} для статистики C_n^{-1/2} D(n)(β̂ − β)"""
    return symmetric_inverse_sqrt(est.matrix)
