from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import DimensionMismatch, InvalidConfig, MalformedInput


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise DimensionMismatch(f"{name}: ожидалась размерность {ndim}, получено {array.ndim}")
    if not np.all(np.isfinite(array)):
        raise MalformedInput(f"{name}: есть нечисловые или бесконечные значения")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DesignMatrix:
    """Матрица плана X размера n×p"""
    entries: np.ndarray
    column_names: Tuple[str, ...] = ()

    def __post_init__(self):
        entries = _frozen_array(self.entries, 2, "X")
        n, p = entries.shape
        if p < 1 or n < p:
            raise DimensionMismatch(f"Нужно n ≥ p ≥ 1, получено n={n}, p={p}")
        object.__setattr__(self, "entries", entries)
        names = tuple(self.column_names) or tuple(f"x{j}" for j in range(p))
        if len(names) != p:
            raise DimensionMismatch("Число имён столбцов не совпадает с p")
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]

    def prefix(self, m: int) -> "DesignMatrix":
        """Первые m строк плана"""
        return DesignMatrix(self.entries[:m], self.column_names)


@dataclass(frozen=True)
class ResponseVector:
    """Отклик Y"""
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, 1, "Y"))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ScalingMatrix:
    """Диагональ D(n): евклидовы нормы столбцов"""
    diag: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "diag", _frozen_array(self.diag, 1, "D(n)"))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


@dataclass(frozen=True)
class RegressionFit:
    """Результат МНК: β̂, остатки, D(n), R̂(0)"""
    beta_hat: np.ndarray
    residuals: np.ndarray
    scaling: ScalingMatrix
    r0_hat: np.ndarray

    @property
    def n(self) -> int:
        return self.residuals.shape[0]

    @property
    def p(self) -> int:
        return self.beta_hat.shape[0]

    @property
    def scaled_beta(self) -> np.ndarray:
        """Вектор d_j(n)·β̂_j"""
        return self.scaling.diag * self.beta_hat


class KernelId(str, Enum):
    """Идентификатор ядра сглаживания"""
    PAPER = "paper"
    BARTLETT = "bartlett"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class TaperKernel:
    """Симметричное ядро K с компактным носителем и K(0) = 1"""
    id: KernelId
    profile: Callable[[np.ndarray], np.ndarray]
    support_radius: float = 1.0
    flat_radius: float = 1.0
    diagnostic_only: bool = False

    def evaluate(self, x):
        values = self.profile(np.abs(np.asarray(x, dtype=float)))
        return values if np.ndim(values) else float(values)


class AutocovSource(str, Enum):
    RESIDUALS = "residuals"
    ERRORS = "errors"


class BandRule(str, Enum):
    """Полоса незначимости автоковариаций при выборе окна"""
    WHITE_NOISE = "white_noise"
    BARTLETT = "bartlett"


@dataclass(frozen=True)
class AutocovSequence:
    """Эмпирические автоковариации γ̂*_k (или γ̂_k) для лагов 0..max_lag"""
    values: np.ndarray
    n: int
    source: AutocovSource = AutocovSource.RESIDUALS

    @property
    def max_lag(self) -> int:
        return self.values.shape[0] - 1


@dataclass(frozen=True)
class Bandwidth:
    """Ширина окна h и число положительных лагов с K(k/h) > 0"""
    h: float
    kept_lags: int

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidConfig(f"Ширина окна должна быть положительной, получено {self.h}")


@dataclass(frozen=True)
class BandwidthRateCheck:
    ratio: float
    warning: bool
    moment_exponent: float


@dataclass(frozen=True)
class LagCrossMoment:
    """Матрица B_{k,n} нормированных перекрёстных моментов с лагом k"""
    k: int
    matrix: np.ndarray


@dataclass(frozen=True)
class CovarianceEstimate:
    """Оценка C_n асимптотической ковариации D(n)(β̂ − β)"""
    matrix: np.ndarray
    bandwidth: Bandwidth
    kernel_id: KernelId
    psd: bool
    n: int
    min_eigenvalue: float

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class UnivariateTest:
    coefficient_index: int
    statistic: float
    p_value: float

    @property
    def reject_at_5pct(self) -> bool:
        return self.p_value < 0.05


@dataclass(frozen=True)
class JointTest:
    indices: Tuple[int, ...]
    statistic: float
    p_value: float
    components: np.ndarray

    @property
    def degrees(self) -> int:
        return len(self.indices)

    @property
    def reject_at_5pct(self) -> bool:
        return self.p_value < 0.05


@dataclass(frozen=True)
class DesignDiagnostics:
    """Эмпирические аналоги условий на план"""
    d_values: np.ndarray
    lindeberg_ratios: np.ndarray
    rho_hat: np.ndarray
    r0_min_eigenvalue: float
    warnings: List[str] = field(default_factory=list)

    def rho(self, j: int, l: int, k: int) -> float:
        return float(self.rho_hat[k, j, l])


@dataclass(frozen=True)
class ErrorProcessSpec:
    """Параметры марковской цепи ошибок"""
    n: int
    sigma2: float = 25.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidConfig("sigma2 должна быть положительной")
        if self.n < 1:
            raise InvalidConfig("n должно быть не меньше 1")


class ModelId(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"


MODEL_DIMENSIONS: Dict[ModelId, int] = {ModelId.MODEL1: 2, ModelId.MODEL2: 3}
DESIGN_AR_COEFFICIENT = 0.5


@dataclass(frozen=True)
class ModelSpec:
    """Модель регрессии из симуляционного исследования"""
    model_id: ModelId
    beta: Tuple[float, ...]
    n: int
    design_ar_variance: float = 9.0
    design_ar_coefficient: float = DESIGN_AR_COEFFICIENT
    sigma2: float = 25.0

    def __post_init__(self):
        object.__setattr__(self, "model_id", ModelId(self.model_id))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        expected = MODEL_DIMENSIONS[self.model_id]
        if len(self.beta) != expected:
            raise InvalidConfig(f"{self.model_id.value}: ожидалось {expected} коэффициентов, получено {len(self.beta)}")
        if self.n < expected:
            raise InvalidConfig(f"n должно быть не меньше {expected}")
        if not self.design_ar_variance > 0:
            raise InvalidConfig("Дисперсия AR-процесса плана должна быть положительной")
        if not abs(self.design_ar_coefficient) < 1:
            raise InvalidConfig("Коэффициент AR-процесса плана должен быть по модулю меньше 1")

    @property
    def p(self) -> int:
        return MODEL_DIMENSIONS[self.model_id]


class TestKind(str, Enum):
    T_ON_BETA1 = "t_on_beta1"
    JOINT_ON_BETA1_BETA2 = "joint_on_beta1_beta2"

    # не даём pytest принять перечисление за тестовый класс
    __test__ = False


@dataclass(frozen=True)
class MonteCarloResult:
    """Оценка уровня или мощности теста"""
    replications: int
    rejections: int
    failures: int
    n: int
    h: Optional[float]
    kernel_id: KernelId
    beta: Tuple[float, ...]
    seed: int
    test: TestKind

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.replications

    @property
    def standard_error(self) -> float:
        r = self.rejection_rate
        return float(np.sqrt(r * (1.0 - r) / self.replications))
