"""
Эмпирическая проверка условий на план: рост d_j(n), отношение
Линдеберга, коэффициенты ρ̂_{j,l}(k) и положительная определённость R̂(0).

Условия асимптотические, поэтому результаты носят рекомендательный характер.
"""

import logging

import numpy as np
from scipy import linalg

from app.core.exceptions import InvalidConfig, LagOutOfRange, ZeroColumn
from app.estimation.covariance import lag_cross_moment
from app.estimation.ols import column_scalings, normalized_gram
from app.models.models import DesignDiagnostics, DesignMatrix


logger = logging.getLogger(__name__)

LINDEBERG_WARNING_RATIO = 0.5
R0_EIGENVALUE_WARNING = 1e-10


def design_diagnostics(
    X: DesignMatrix,
    max_lag: int,
    lindeberg_warning_ratio: float = LINDEBERG_WARNING_RATIO,
    r0_eigenvalue_warning: float = R0_EIGENVALUE_WARNING,
) -> DesignDiagnostics:
    """
    Диагностика плана.

    Args:
        X: Матрица плана
        max_lag: Наибольший лаг для ρ̂_{j,l}(k)
        lindeberg_warning_ratio: Порог отношения sup|x_ij|/d_j(n)
        r0_eigenvalue_warning: Порог минимального собственного числа R̂(0)

    Returns:
        DesignDiagnostics: Значения и список предупреждений

    Raises:
        ZeroColumn: Если в плане есть нулевой столбец
        LagOutOfRange: Если max_lag вне [0, n − 1]
    """
    if not 0 <= max_lag <= X.n - 1:
        raise LagOutOfRange(f"max_lag={max_lag} вне диапазона [0, {X.n - 1}]")

    scaling = column_scalings(X)
    lindeberg = np.max(np.abs(X.entries), axis=0) / scaling.diag
    rho_hat = np.stack([lag_cross_moment(X, scaling, k).matrix for k in range(max_lag + 1)])
    r0_min = float(linalg.eigvalsh(normalized_gram(X, scaling))[0])

    warnings = []
    for j in np.flatnonzero(lindeberg > lindeberg_warning_ratio):
        warnings.append(
            f"столбец {X.column_names[j]}: одна точка доминирует "
            f"(sup|x|/d = {lindeberg[j]:.4f} > {lindeberg_warning_ratio})"
        )
    if r0_min < r0_eigenvalue_warning:
        warnings.append(f"R̂(0) близка к вырожденной: λ_min = {r0_min:.3e}")

    for message in warnings:
        logger.warning("Диагностика плана: %s", message)

    return DesignDiagnostics(
        d_values=scaling.diag,
        lindeberg_ratios=lindeberg,
        rho_hat=rho_hat,
        r0_min_eigenvalue=r0_min,
        warnings=warnings,
    )


def prefix_sizes(n: int, splits: int) -> np.ndarray:
    """Длины вложенных префиксов n/splits, 2n/splits, …, n"""
    return np.array([(s * n) // splits for s in range(1, splits + 1)])


def rho_stability(X: DesignMatrix, j: int, l: int, k: int, splits: int) -> np.ndarray:
    """
    ρ̂_{j,l}(k) на вложенных префиксах плана.

    Дрейф последовательности указывает, что предел ρ_{j,l}(k) при данном n
    ещё не установился.

    Raises:
        InvalidConfig: Если splits < 2 или индексы столбцов вне диапазона
        LagOutOfRange: Если какой-то префикс короче k + 1
    """
    if splits < 2:
        raise InvalidConfig("splits должно быть не меньше 2")
    if not (0 <= j < X.p and 0 <= l < X.p):
        raise InvalidConfig(f"Индексы столбцов ({j}, {l}) вне диапазона [0, {X.p - 1}]")

    sizes = prefix_sizes(X.n, splits)
    if k < 0 or sizes[0] <= k:
        raise LagOutOfRange(f"Лаг {k} недопустим для префикса длины {sizes[0]}")

    values = []
    for m in sizes:
        x = X.entries[:m]
        d = np.sqrt(np.sum(x[:, [j, l]] ** 2, axis=0))
        if np.any(d == 0):
            raise ZeroColumn(f"Нулевой столбец на префиксе длины {m}")
        if k == 0 and j == l:
            values.append(1.0)
            continue
        values.append(float(x[: m - k, j] @ x[k:, l] / (d[0] * d[1])))
    return np.array(values)
