"""
Иерархия ошибок оценивания.

Каждая ошибка знает свой код выхода CLI и HTTP-статус, чтобы CLI и
API обрабатывали их одинаково.
"""

from typing import Optional


class EstimationError(ValueError):
    """Базовая ошибка библиотеки"""
    exit_code: int = 1
    status_code: int = 400

    def __init__(self, message: str, advice: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.advice = advice

    def __str__(self) -> str:
        if self.advice:
            return f"{self.message} ({self.advice})"
        return self.message


class InvalidInputError(EstimationError):
    """Некорректные входные данные или конфигурация"""
    exit_code = 2
    status_code = 422


class DimensionMismatch(InvalidInputError):
    pass


class EmptySeries(InvalidInputError):
    pass


class LagOutOfRange(InvalidInputError):
    pass


class EmptyIndexSet(InvalidInputError):
    pass


class MalformedInput(InvalidInputError):
    pass


class InvalidConfig(InvalidInputError):
    pass


class DesignError(EstimationError):
    """Матрица плана непригодна для МНК"""
    exit_code = 3


class RankDeficient(DesignError):
    pass


class ZeroColumn(DesignError):
    pass


class SingularR0(DesignError):
    pass


class CovarianceError(EstimationError):
    """Оценка ковариации непригодна для теста"""
    exit_code = 4


BARTLETT_ADVICE = "попробуйте ядро bartlett: --kernel bartlett"


class NotPositiveDefinite(CovarianceError):

    def __init__(self, message: str, eigenvalue: float, advice: Optional[str] = BARTLETT_ADVICE):
        super().__init__(message, advice)
        self.eigenvalue = eigenvalue


class NonPositiveVariance(CovarianceError):
    pass


class DegenerateSeries(CovarianceError):
    pass
