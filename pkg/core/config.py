from pydantic import field_validator
from pydantic_settings import BaseSettings
import os


class Settings(BaseSettings):
    """Configuración de la aplicación"""
    APP_NAME: str = "cavity-selforg"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "WARNING"

    # Número de workers para los barridos (0 = todos los núcleos)
    THREADS: int = 0

    # Valores por defecto numéricos
    DEFAULT_GRID_POINTS: int = 200
    FLOAT_DIGITS: int = 12

    model_config = {"env_file": ".env", "env_prefix": "CAVITY_SELFORG_", "extra": "ignore"}

    @field_validator('THREADS')
    def validate_threads(cls, v):
        if v < 0:
            raise ValueError('THREADS no puede ser negativo')
        return v

    @field_validator('LOG_LEVEL')
    def validate_log_level(cls, v):
        v = v.strip().upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f'Nivel de logging desconocido: {v}')
        return v

    @property
    def worker_count(self) -> int:
        """Número efectivo de workers para los barridos."""
        return self.THREADS or (os.cpu_count() or 1)


settings = Settings()
