"""
Обычный МНК с нормировкой столбцов D(n).

Нормальные уравнения решаются через QR-разложение нормированного плана
X·D(n)^{-1}, так что (X^tX)^{-1} никогда не формируется явно.
"""

import logging

import numpy as np
from scipy import linalg

from app.core.exceptions import DimensionMismatch, RankDeficient, ZeroColumn
from app.models.models import DesignMatrix, RegressionFit, ResponseVector, ScalingMatrix


logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-12
EXACT_FIT_TOLERANCE = 1e-12


def column_scalings(X: DesignMatrix) -> ScalingMatrix:
    """
    Евклидовы нормы столбцов плана d_j(n).

    Raises:
        ZeroColumn: Если какой-либо столбец нулевой
    """
    d = np.sqrt(np.sum(X.entries ** 2, axis=0))
    zero = np.flatnonzero(d == 0)
    if zero.size:
        names = ", ".join(X.column_names[j] for j in zero)
        raise ZeroColumn(f"Нулевые столбцы плана: {names}")
    return ScalingMatrix(d)


def normalized_gram(X: DesignMatrix, scaling: ScalingMatrix) -> np.ndarray:
    """R̂(0) = D(n)^{-1} X^t X D(n)^{-1} с точной единичной диагональю"""
    scaled = X.entries / scaling.diag
    r0 = scaled.T @ scaled
    r0 = (r0 + r0.T) / 2
    np.fill_diagonal(r0, 1.0)
    return r0


def fit_ols(X: DesignMatrix, Y: ResponseVector) -> RegressionFit:
    """
    Оценка МНК β̂ = (X^tX)^{-1}X^tY.

    Args:
        X: Матрица плана n×p
        Y: Отклик длины n

    Returns:
        RegressionFit: β̂, остатки, D(n) и R̂(0)

    Raises:
        DimensionMismatch: Если длина Y не совпадает с n
        ZeroColumn: Если в плане есть нулевой столбец
        RankDeficient: Если план численно вырожден
    """
    if Y.n != X.n:
        raise DimensionMismatch(f"Длина отклика {Y.n} не совпадает с числом строк плана {X.n}")

    scaling = column_scalings(X)
    scaled = X.entries / scaling.diag

    q, r = linalg.qr(scaled, mode="economic")
    diag = np.abs(np.diag(r))
    ratio = diag.min() / diag.max()
    if ratio < RANK_TOLERANCE:
        raise RankDeficient(f"План не имеет полного ранга: min|r_jj|/max|r_jj| = {ratio:.3e}")

    scaled_beta = linalg.solve_triangular(r, q.T @ Y.values)
    beta_hat = scaled_beta / scaling.diag
    residuals = Y.values - X.entries @ beta_hat
    # точная подгонка: остатки на уровне ошибок округления считаем нулевыми
    if np.linalg.norm(residuals) <= EXACT_FIT_TOLERANCE * np.linalg.norm(Y.values):
        residuals = np.zeros_like(residuals)

    logger.debug("МНК: n=%d, p=%d, отношение диагонали R=%.3e", X.n, X.p, ratio)

    return RegressionFit(
        beta_hat=beta_hat,
        residuals=residuals,
        scaling=scaling,
        r0_hat=normalized_gram(X, scaling),
    )
