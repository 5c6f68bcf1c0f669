import logging
from typing import Optional

from .config import settings


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """
    Настройка корневого логгера пакета.

    Args:
        level: Уровень логирования; по умолчанию берётся из настроек
    """
    root = logging.getLogger("app")
    root.setLevel(level or settings.effective_log_level)

    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
