"""
Utilities for environment, logging and config files.
"""

import logging
import os
from pathlib import Path
from typing import Optional, Type, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from .errors import ConfigurationError

T = TypeVar("T", bound=BaseModel)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_LOG_LEVEL = "INFO"


def load_env() -> None:
    """Подгружает .env из текущего каталога (не перезаписывает уже заданные переменные)."""
    load_dotenv()


def setup_logging(level: Optional[str] = None) -> None:
    level = (level or os.getenv("COVSTEER_LOG_LEVEL", DEFAULT_LOG_LEVEL)).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigurationError(f"unknown log level {level!r}")
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def env_int(name: str) -> Optional[int]:
    """Integer environment variable or None when unset."""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name}={raw!r} is not an integer") from None


def default_jobs() -> int:
    return env_int("COVSTEER_JOBS") or os.cpu_count() or 1


def load_config(path: str | Path, model: Type[T]) -> T:
    """
    Reads a JSON config file into `model`.

    Raises:
        FileNotFoundError: файла нет
        ConfigurationError: JSON не проходит валидацию
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config not found: {path}")
    try:
        return model.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigurationError(f"invalid config {path}:\n{e}") from e


def echo_config(out_dir: str | Path, config: BaseModel, name: str = "config.json") -> Path:
    """Writes the fully resolved config next to the outputs it produced."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    target.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    return target
