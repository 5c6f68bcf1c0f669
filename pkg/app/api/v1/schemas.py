from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, List, Optional, Union
from enum import Enum

from app.core.config import KNOWN_KERNELS



class BandwidthSchema(BaseModel):
    """Ширина окна"""
    h: float = Field(..., description="Ширина окна h", gt=0)
    kept_lags: int = Field(..., description="Число положительных лагов с K(k/h) > 0")


class BandwidthRateSchema(BaseModel):
    """Проверка условия на скорость роста окна"""
    ratio: float = Field(..., description="h^{1+δ/2}/n^{δ/2}")
    warning: bool = Field(..., description="Отношение больше 1")


class CovarianceSidecar(BaseModel):
    """JSON-описание сохранённой матрицы C_n"""
    bandwidth: float
    kept_lags: int
    kernel: str
    psd: bool
    min_eigenvalue: float
    n: int
    p: int



class UnivariateTestSchema(BaseModel):
    """Результат теста T_{j,n}"""
    index: int = Field(..., description="Номер коэффициента (с нуля)")
    name: Optional[str] = Field(None, description="Имя регрессора")
    statistic: float
    p_value: float = Field(..., ge=0, le=1)
    reject_at_5pct: bool
    bandwidth: float
    kernel: str


class JointTestSchema(BaseModel):
    """Результат совместного теста Ξ"""
    indices: List[int]
    statistic: float = Field(..., ge=0)
    dof: int = Field(..., ge=1)
    p_value: float = Field(..., ge=0, le=1)
    reject_at_5pct: bool
    components: List[float] = Field(..., description="Компоненты Z_{i,n}")
    bandwidth: float
    kernel: str


class CoefficientSchema(BaseModel):
    """Оценка коэффициента с масштабом и тестом"""
    index: int
    name: str
    beta_hat: float
    d: float = Field(..., description="Норма столбца d_j(n)")
    statistic: float
    p_value: float
    reject_at_5pct: bool


class FitReport(BaseModel):
    """Отчёт команды fit"""
    n: int
    p: int
    coefficients: List[CoefficientSchema]
    covariance: List[List[float]] = Field(..., description="Матрица C_n")
    bandwidth: BandwidthSchema
    kernel: str
    psd: bool
    bandwidth_rate: BandwidthRateSchema



class AutocovReport(BaseModel):
    """Автоковариации остатков и предложенная ширина окна"""
    lags: List[int]
    acov: List[float]
    n: int
    suggested_h: float
    kept_lags: int


class DiagnosticsSchema(BaseModel):
    """Диагностика плана"""
    columns: List[str]
    d_values: List[float]
    lindeberg_ratios: List[float]
    rho_hat: List[List[List[float]]] = Field(..., description="ρ̂_{j,l}(k), индексы [k][j][l]")
    r0_min_eigenvalue: float
    warnings: List[str] = Field(default_factory=list)


class RhoStabilitySchema(BaseModel):
    prefix_n: List[int]
    values: List[float]


class MonteCarloRow(BaseModel):
    """Строка таблицы уровня/мощности"""
    n: int
    h: Union[float, str]
    kernel: str
    beta: List[float]
    N: int
    rejection_rate: float = Field(..., ge=0, le=1)
    std_error: float
    failures: int
    reference: Optional[float] = Field(None, description="Опубликованное значение")



class Command(str, Enum):
    FIT = "fit"
    TEST = "test"
    AUTOCOV = "autocov"
    DIAGNOSE = "diagnose"
    SIMULATE = "simulate"


def _check_bandwidth(v: Union[float, str]) -> Union[float, str]:
    if isinstance(v, str):
        if v == "auto":
            return v
        try:
            v = float(v)
        except ValueError:
            raise ValueError("Ширина окна: \"auto\" или положительное число") from None
    if not v > 0:
        raise ValueError("Ширина окна должна быть положительной")
    return float(v)


class RunConfig(BaseModel):
    """Согласованная конфигурация одной команды CLI"""
    command: Command
    input: Optional[str] = None
    response: Optional[str] = None
    add_intercept: bool = False
    kernel: str = "paper"
    bandwidth: Union[float, str] = "auto"
    indices: List[int] = Field(default_factory=list)
    max_lag: int = Field(default=30, ge=0)
    raw: bool = False
    model: Optional[int] = None
    beta: List[float] = Field(default_factory=list)
    n: Optional[int] = Field(None, ge=1)
    sample_sizes: List[int] = Field(default_factory=list)
    replications: int = Field(default=2000, ge=1)
    seed: int = Field(default=0, ge=0)
    experiment: Optional[str] = None
    emit_data: Optional[str] = None
    output: Optional[str] = None

    @field_validator("kernel")
    @classmethod
    def validate_kernel(cls, v: str) -> str:
        if v not in KNOWN_KERNELS:
            raise ValueError(f"Неизвестное ядро: {v}")
        return v

    @field_validator("bandwidth", mode="before")
    @classmethod
    def validate_bandwidth(cls, v):
        return _check_bandwidth(v)

    @model_validator(mode="after")
    def validate_command_flags(self):
        if self.command in (Command.FIT, Command.TEST, Command.AUTOCOV, Command.DIAGNOSE):
            if not self.input:
                raise ValueError(f"Команде {self.command.value} нужен --input")
        if self.command in (Command.FIT, Command.TEST, Command.AUTOCOV) and not self.response:
            raise ValueError(f"Команде {self.command.value} нужен --response")
        if self.command == Command.TEST and not self.indices:
            raise ValueError("Команде test нужны --indices")
        if self.command == Command.SIMULATE and self.experiment is None:
            if self.model not in (1, 2):
                raise ValueError("Команде simulate нужна --model 1 или 2 (или --experiment)")
            expected = 2 if self.model == 1 else 3
            if len(self.beta) != expected:
                raise ValueError(f"Модели {self.model} нужно {expected} значений --beta")
            if self.n is None and not self.sample_sizes:
                raise ValueError("Команде simulate нужен --n")
        return self



class RegressionRequest(BaseModel):
    """Данные регрессии в теле запроса"""
    columns: Dict[str, List[float]] = Field(..., description="Столбцы таблицы")
    response: str = Field(..., description="Имя или номер столбца отклика")
    add_intercept: bool = Field(False, description="Добавить столбец единиц")
    kernel: str = Field("paper", description="paper, bartlett или rectangular")
    bandwidth: Union[float, str] = Field("auto", description='"auto" или число')

    @field_validator("kernel")
    @classmethod
    def validate_kernel(cls, v: str) -> str:
        if v not in KNOWN_KERNELS:
            raise ValueError(f"Неизвестное ядро: {v}")
        return v

    @field_validator("bandwidth", mode="before")
    @classmethod
    def validate_bandwidth(cls, v):
        return _check_bandwidth(v)


class HypothesisTestRequest(RegressionRequest):
    """Запрос теста по набору коэффициентов"""
    indices: List[int] = Field(..., min_length=1, description="Номера коэффициентов (с нуля)")


class AutocovRequest(RegressionRequest):
    max_lag: int = Field(30, ge=0)
    raw: bool = Field(False, description="Считать автоковариации самого отклика")


class DiagnoseRequest(BaseModel):
    """Запрос диагностики плана"""
    columns: Dict[str, List[float]]
    response: Optional[str] = Field(None, description="Столбец, исключаемый из плана")
    add_intercept: bool = False
    max_lag: int = Field(5, ge=0)


class SimulateRequest(BaseModel):
    """Запрос Монте-Карло исследования"""
    model: int = Field(..., ge=1, le=2)
    beta: List[float]
    n: int = Field(..., ge=3)
    replications: int = Field(200, ge=1, le=20000)
    seed: int = Field(0, ge=0)
    kernel: str = "paper"
    bandwidth: Union[float, str] = "auto"

    @field_validator("bandwidth", mode="before")
    @classmethod
    def validate_bandwidth(cls, v):
        return _check_bandwidth(v)

    @model_validator(mode="after")
    def validate_beta(self):
        expected = 2 if self.model == 1 else 3
        if len(self.beta) != expected:
            raise ValueError(f"Модели {self.model} нужно {expected} коэффициентов")
        return self


class ErrorResponse(BaseModel):
    """Схема для ошибок"""
    detail: str = Field(..., description="Описание ошибки")
    error: str = Field(..., description="Класс ошибки")
