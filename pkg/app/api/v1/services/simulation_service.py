from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.core.config import Settings
from app.core.exceptions import InvalidConfig
from app.estimation.simulation import (
    PAPER_EXPERIMENTS, PAPER_SAMPLE_SIZES, Replication, level_power_table, simulate_replication
)
from app.models.models import ModelId, ModelSpec, MonteCarloResult
from app.api.v1.schemas import MonteCarloRow


MODEL_IDS = {1: ModelId.MODEL1, 2: ModelId.MODEL2}


class SimulationService:
    """Сервис Монте-Карло исследований уровня и мощности"""

    def __init__(self, settings: Settings):
        self.settings = settings

    @property
    def workers(self) -> int:
        return self.settings.threads or 1

    def model_spec(self, model: int, beta: Sequence[float], n: int) -> ModelSpec:
        try:
            return ModelSpec(MODEL_IDS[model], tuple(beta), n)
        except KeyError:
            raise InvalidConfig(f"Неизвестная модель: {model}") from None

    def run(
        self,
        model: int,
        beta: Sequence[float],
        sample_sizes: Sequence[int],
        kernel: str,
        bandwidth: Union[float, str],
        replications: int,
        seed: int,
    ) -> List[MonteCarloResult]:
        """Таблица уровня/мощности по сетке длин выборки"""
        spec = self.model_spec(model, beta, sample_sizes[0])
        return level_power_table(
            spec,
            sample_sizes,
            h=bandwidth,
            kernel=kernel,
            replications=replications,
            seed=seed,
            workers=self.workers,
            auto_max_lag=self.settings.default_max_lag,
        )

    def run_experiment(
        self,
        name: str,
        replications: int,
        seed: int,
        sample_sizes: Optional[Sequence[int]] = None,
        kernel: str = "paper",
    ) -> Tuple[List[MonteCarloResult], Dict[int, float]]:
        """Повторить опубликованное исследование; возвращает и эталонные значения"""
        try:
            experiment = PAPER_EXPERIMENTS[name]
        except KeyError:
            known = ", ".join(sorted(PAPER_EXPERIMENTS))
            raise InvalidConfig(f"Неизвестный эксперимент {name}; доступны: {known}") from None

        sizes = list(sample_sizes or PAPER_SAMPLE_SIZES)
        results = level_power_table(
            experiment.model(sizes[0]),
            sizes,
            test=experiment.test,
            h=experiment.h,
            kernel=kernel,
            replications=replications,
            seed=seed,
            workers=self.workers,
        )
        return results, experiment.reference

    def emit_data(self, model: int, beta: Sequence[float], n: int, seed: int) -> Replication:
        """Данные первого повтора для проверки конвейера"""
        return simulate_replication(self.model_spec(model, beta, n), seed, 0)

    @staticmethod
    def to_rows(results: Sequence[MonteCarloResult], reference: Optional[Dict[int, float]] = None) -> List[MonteCarloRow]:
        return [
            MonteCarloRow(
                n=r.n,
                h="auto" if r.h is None else r.h,
                kernel=r.kernel_id.value,
                beta=list(r.beta),
                N=r.replications,
                rejection_rate=r.rejection_rate,
                std_error=r.standard_error,
                failures=r.failures,
                reference=(reference or {}).get(r.n),
            )
            for r in results
        ]
