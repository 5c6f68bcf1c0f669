from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, field_validator
from typing import Optional
from dotenv import load_dotenv

from app.estimation.diagnostics import LINDEBERG_WARNING_RATIO, R0_EIGENVALUE_WARNING
from app.models.models import BandRule, KernelId

# Загружаем переменные окружения из .env файла
load_dotenv()


KNOWN_KERNELS = tuple(kernel.value for kernel in KernelId)


class Settings(BaseSettings):
    # Simulation settings
    threads: Optional[int] = Field(default=None, description="Максимум процессов для Монте-Карло")

    # Estimation defaults
    default_kernel: str = Field(default="paper")
    default_max_lag: int = Field(default=30, ge=1)
    band_rule: BandRule = Field(default=BandRule.BARTLETT, description="Полоса незначимости при выборе окна")
    lindeberg_warning_ratio: float = Field(default=LINDEBERG_WARNING_RATIO, gt=0, le=1)
    r0_eigenvalue_warning: float = Field(default=R0_EIGENVALUE_WARNING, gt=0)

    # Application settings
    debug: bool = Field(default=False)
    log_level: str = Field(default="INFO")
    host: str = Field(default="0.0.0.0")
    port: int = Field(default=8000)

    # API settings
    api_v1_prefix: str = "/api/v1"
    project_name: str = "DepLM"
    project_version: str = "1.0.0"
    project_description: str = "МНК-инференция в линейных моделях с зависимыми ошибками"

    model_config = SettingsConfigDict(
        env_prefix="DEPLM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("DEPLM_THREADS должен быть положительным")
        return v

    @field_validator("default_kernel")
    @classmethod
    def validate_kernel(cls, v: str) -> str:
        if v not in KNOWN_KERNELS:
            raise ValueError(f"Неизвестное ядро: {v}")
        return v

    @property
    def effective_log_level(self) -> str:
        """Уровень логирования с учётом режима отладки"""
        return "DEBUG" if self.debug else self.log_level.upper()


# Создаем единственный экземпляр настроек
settings = Settings()
