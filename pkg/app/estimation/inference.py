"""
Скорректированные тесты: одномерная статистика T_{j,n} и совместная
статистика Ξ с асимптотическими нормальным и χ² распределениями.
"""

import logging
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy import special

from app.core.exceptions import BARTLETT_ADVICE, EmptyIndexSet, InvalidConfig, NonPositiveVariance
from app.estimation.covariance import symmetric_inverse_sqrt
from app.models.models import CovarianceEstimate, JointTest, RegressionFit, UnivariateTest


logger = logging.getLogger(__name__)


def normal_cdf(x):
    """Функция распределения Φ стандартного нормального закона"""
    return special.ndtr(x)


def chi_square_sf(x, dof: int):
    """
    Верхний хвост χ²(dof) через регуляризованную неполную гамма-функцию.

    Raises:
        InvalidConfig: Если x < 0 или dof < 1
    """
    if int(dof) != dof or dof < 1:
        raise InvalidConfig(f"Число степеней свободы должно быть натуральным, получено {dof}")
    x_array = np.asarray(x, dtype=float)
    if np.any(x_array < 0):
        raise InvalidConfig("Аргумент χ² должен быть неотрицательным")
    return special.gammaincc(dof / 2.0, x_array / 2.0)


def _check_index(fit: RegressionFit, j: int) -> int:
    if not 0 <= j < fit.p:
        raise InvalidConfig(f"Индекс коэффициента {j} вне диапазона [0, {fit.p - 1}]")
    return int(j)


def t_test(fit: RegressionFit, est: CovarianceEstimate, j: int) -> UnivariateTest:
    """
    T_{j,n} = d_j(n) β̂_j / sqrt(c_{n,(j,j)}) с двусторонним p-значением.

    Raises:
        NonPositiveVariance: Если c_{n,(j,j)} ≤ 0
    """
    j = _check_index(fit, j)
    variance = est.matrix[j, j]
    if not variance > 0:
        raise NonPositiveVariance(
            f"Оценка дисперсии c_n({j},{j}) = {variance:.3e} не положительна",
            advice=BARTLETT_ADVICE,
        )

    statistic = float(fit.scaled_beta[j] / np.sqrt(variance))
    p_value = float(2.0 * normal_cdf(-abs(statistic)))
    return UnivariateTest(coefficient_index=j, statistic=statistic, p_value=p_value)


def _normalize_indices(fit: RegressionFit, indices: Iterable[int]) -> Tuple[int, ...]:
    normalized = tuple(_check_index(fit, j) for j in indices)
    if not normalized:
        raise EmptyIndexSet("Пустой набор проверяемых коэффициентов")
    if len(set(normalized)) != len(normalized):
        raise InvalidConfig("Индексы коэффициентов повторяются")
    return normalized


def joint_test(fit: RegressionFit, est: CovarianceEstimate, indices: Sequence[int]) -> JointTest:
    """
    Совместный тест Ξ = ‖C_{n,p0}^{-1/2} v‖², v = (d_j(n) β̂_j)_{j ∈ indices}.

    Args:
        fit: Результат МНК
        est: Оценка C_n
        indices: Номера проверяемых коэффициентов (с нуля)

    Returns:
        JointTest: Ξ, компоненты Z и p-значение по χ²(p0)

    Raises:
        EmptyIndexSet: Если индексы не заданы
        NotPositiveDefinite: Если подматрица C_n не положительно определена
    """
    idx = _normalize_indices(fit, indices)
    submatrix = est.matrix[np.ix_(idx, idx)]
    components = symmetric_inverse_sqrt(submatrix) @ fit.scaled_beta[list(idx)]
    statistic = float(components @ components)
    p_value = float(chi_square_sf(statistic, len(idx)))
    return JointTest(indices=idx, statistic=statistic, p_value=p_value, components=components)
