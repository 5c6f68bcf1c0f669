"""
Ядра сглаживания, эмпирические автоковариации, сглаженная оценка
спектральной плотности и выбор ширины окна.
"""

import logging
import math
from typing import Dict, Optional, Union

import numpy as np

from app.core.exceptions import DegenerateSeries, EmptySeries, InvalidConfig, LagOutOfRange
from app.models.models import (
    AutocovSequence, AutocovSource, BandRule, Bandwidth, BandwidthRateCheck, KernelId, TaperKernel
)


logger = logging.getLogger(__name__)

WHITE_NOISE_QUANTILE = 1.96
CONFIRMATION_LAGS = 5
MIN_BANDWIDTH_OBSERVATIONS = 30


def _paper_profile(a: np.ndarray) -> np.ndarray:
    return np.where(a < 0.8, 1.0, np.where(a <= 1.0, 5.0 - 5.0 * a, 0.0))


def _bartlett_profile(a: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - a, 0.0, None)


def _rectangular_profile(a: np.ndarray) -> np.ndarray:
    return np.where(a <= 1.0, 1.0, 0.0)


KERNELS: Dict[KernelId, TaperKernel] = {
    KernelId.PAPER: TaperKernel(KernelId.PAPER, _paper_profile, flat_radius=0.8),
    KernelId.BARTLETT: TaperKernel(KernelId.BARTLETT, _bartlett_profile),
    # преобразование Фурье не интегрируемо: только для сравнения
    KernelId.RECTANGULAR: TaperKernel(KernelId.RECTANGULAR, _rectangular_profile, diagnostic_only=True),
}


def get_kernel(kernel_id: Union[str, KernelId]) -> TaperKernel:
    """Получить ядро по идентификатору"""
    try:
        return KERNELS[KernelId(kernel_id)]
    except ValueError:
        raise InvalidConfig(f"Неизвестное ядро: {kernel_id}") from None


def lag_window(h: float, kernel: TaperKernel, n: int) -> int:
    """Наибольший лаг, который может получить ненулевой вес"""
    return max(0, min(int(math.floor(h * kernel.support_radius)), n - 1))


def make_bandwidth(h: float, kernel: TaperKernel, n: int) -> Bandwidth:
    """
    Построить ширину окна, ограничив h так, чтобы h·radius ≤ n − 1.

    Args:
        h: Желаемая ширина окна
        kernel: Ядро
        n: Объём выборки

    Returns:
        Bandwidth: Ширина окна и число положительных лагов с K(k/h) > 0
    """
    if not h > 0:
        raise InvalidConfig(f"Ширина окна должна быть положительной, получено {h}")
    if n > 1 and h * kernel.support_radius > n - 1:
        logger.info("Ширина окна %.4g ограничена объёмом выборки n=%d", h, n)
        h = (n - 1) / kernel.support_radius

    lags = np.arange(1, lag_window(h, kernel, n) + 1)
    kept = int(np.count_nonzero(kernel.evaluate(lags / h) > 0)) if lags.size else 0
    return Bandwidth(h=float(h), kept_lags=kept)


def autocovariance(
    series,
    max_lag: int,
    source: AutocovSource = AutocovSource.RESIDUALS,
) -> AutocovSequence:
    """
    Эмпирические автоковариации с делителем n на каждом лаге.

    values[k] = (1/n) Σ_{j=1}^{n−k} s_j s_{j+k}

    Raises:
        EmptySeries: Если ряд пуст
        LagOutOfRange: Если max_lag вне [0, n − 1]
    """
    s = np.asarray(series, dtype=float)
    n = s.shape[0]
    if n == 0:
        raise EmptySeries("Пустой ряд")
    if not 0 <= max_lag <= n - 1:
        raise LagOutOfRange(f"max_lag={max_lag} вне диапазона [0, {n - 1}]")

    values = np.array([s[: n - k] @ s[k:] for k in range(max_lag + 1)]) / n
    values.setflags(write=False)
    return AutocovSequence(values=values, n=n, source=AutocovSource(source))


def kernel_weights(kernel: TaperKernel, h: Bandwidth, max_lag: int) -> np.ndarray:
    """Веса K(k/h) для лагов 0..max_lag"""
    return kernel.evaluate(np.arange(max_lag + 1) / h.h)


def _tapered(acov: AutocovSequence, kernel: TaperKernel, h: Bandwidth) -> np.ndarray:
    needed = lag_window(h.h, kernel, acov.n)
    if acov.max_lag < needed:
        raise LagOutOfRange(f"Автоковариации посчитаны до лага {acov.max_lag}, нужно до {needed}")
    return kernel_weights(kernel, h, needed) * acov.values[: needed + 1]


def spectral_density_estimate(acov: AutocovSequence, kernel: TaperKernel, h: Bandwidth, lam):
    """
    Сглаженная оценка спектральной плотности

        f*(λ) = (1/2π)[K(0)γ̂*_0 + 2 Σ_{k≥1} K(k/h)γ̂*_k cos(kλ)]

    Args:
        acov: Автоковариации
        kernel: Ядро
        h: Ширина окна
        lam: Частота или массив частот в [−π, π]

    Returns:
        Значение (или массив значений) оценки
    """
    tapered = _tapered(acov, kernel, h)
    lam_array = np.asarray(lam, dtype=float)
    lags = np.arange(1, tapered.shape[0])
    cosines = np.cos(np.multiply.outer(lam_array, lags))
    value = (tapered[0] + 2.0 * cosines @ tapered[1:]) / (2.0 * np.pi)
    return value if lam_array.ndim else float(value)


def significance_band(acov: AutocovSequence, rule: BandRule = BandRule.BARTLETT) -> np.ndarray:
    """
    Полуширина полосы незначимости для каждого лага 0..max_lag.

    white_noise: 1.96·γ̂*_0/√n на всех лагах.
    bartlett: 1.96·γ̂*_0·√((1 + 2Σ_{j<k} ρ̂_j²)/n), дисперсия выборочной
    автокорреляции зависимого ряда, у которого ρ_j = 0 начиная с лага k.
    """
    gamma0 = acov.values[0]
    n = acov.n
    if BandRule(rule) is BandRule.WHITE_NOISE:
        return np.full(acov.values.shape, WHITE_NOISE_QUANTILE * gamma0 / math.sqrt(n))

    rho_squared = (acov.values[1:] / gamma0) ** 2
    preceding = np.concatenate(([0.0, 0.0], np.cumsum(rho_squared)[:-1]))[: acov.values.shape[0]]
    return WHITE_NOISE_QUANTILE * gamma0 * np.sqrt((1.0 + 2.0 * preceding) / n)


def suggest_bandwidth(
    acov: AutocovSequence,
    kernel: TaperKernel,
    rule: BandRule = BandRule.BARTLETT,
) -> Bandwidth:
    """
    Автоматический выбор ширины окна по графику автоковариаций.

    k₀ есть наименьший лаг, начиная с которого пять подряд идущих
    автоковариаций лежат в полосе незначимости (см. significance_band).
    Сохраняются лаги 0..k₀−1, плоская часть ядра должна их покрывать:
    h = k₀ / flat_radius (k₀/0.8 для ядра paper, k₀ для остальных).

    Raises:
        DegenerateSeries: Если γ̂*_0 = 0
        InvalidConfig: Если наблюдений меньше 30
    """
    gamma0 = acov.values[0]
    if gamma0 <= 0:
        raise DegenerateSeries("Нулевая дисперсия ряда: γ̂*_0 = 0, ширину окна выбрать нельзя")
    n = acov.n
    if n < MIN_BANDWIDTH_OBSERVATIONS:
        raise InvalidConfig(f"Для выбора ширины окна нужно не меньше {MIN_BANDWIDTH_OBSERVATIONS} наблюдений")

    inside = np.abs(acov.values) <= significance_band(acov, rule)

    k0: Optional[int] = None
    for k in range(1, acov.max_lag + 1):
        last = min(k + CONFIRMATION_LAGS - 1, n - 1)
        if last > acov.max_lag:
            break
        if inside[k: last + 1].all():
            k0 = k
            break

    if k0 is None:
        k0 = acov.max_lag + 1
        logger.warning("Автоковариации не вошли в полосу незначимости до лага %d", acov.max_lag)

    bandwidth = make_bandwidth(k0 / kernel.flat_radius, kernel, n)
    logger.debug("Предложена ширина окна h=%.4g (k₀=%d)", bandwidth.h, k0)
    return bandwidth


def check_bandwidth_rate(h: Bandwidth, n: int, moment_exponent: float = 2.0) -> BandwidthRateCheck:
    """
    Достаточное условие на скорость роста окна: h^{1+δ/2}/n^{δ/2} → 0.

    При δ = 2 (четвёртый момент) это правило h²/n.
    """
    if not 0 < moment_exponent <= 2:
        raise InvalidConfig("Показатель момента δ должен лежать в (0, 2]")
    if n < 1:
        raise InvalidConfig("n должно быть не меньше 1")

    half = moment_exponent / 2.0
    ratio = h.h ** (1.0 + half) / n ** half
    warning = ratio > 1.0
    if warning:
        logger.warning("Ширина окна h=%.4g слишком велика для n=%d: отношение %.3g", h.h, n, ratio)
    return BandwidthRateCheck(ratio=float(ratio), warning=warning, moment_exponent=moment_exponent)
