from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.config import settings
from schemas.modelSchema import ModelParams
from schemas.solverSchema import SolverOptions


class GridOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_points: int = Field(default_factory=lambda: settings.DEFAULT_GRID_POINTS,
                          description="Puntos de la malla periódica por longitud de onda")

    @field_validator('n_points')
    def validate_n_points(cls, v):
        if v < 4:
            raise ValueError('n_points debe ser al menos 4')
        return v


class SweepOptions(BaseModel):
    """Eje de barrido y sus valores (lista separada por comas o start:stop:step con stop incluido)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: Literal["eta", "u0"] = Field("eta", description="Parámetro barrido")
    values: List[float] = Field(default_factory=list, description="Valores del eje de barrido [ω_R]")

    @field_validator('values', mode='before')
    def parse_values(cls, v):
        if v is None:
            return []
        if isinstance(v, str):
            text = v.strip()
            if not text:
                return []
            if ':' in text:
                return parse_range(text)
            return [float(item) for item in text.split(',') if item.strip()]
        return v

    @field_validator('values')
    def sort_values(cls, v):
        return sorted(v)


def parse_range(text: str) -> List[float]:
    """Expande 'start:stop:step' a una lista con el extremo final incluido."""
    parts = [item.strip() for item in text.split(':')]
    if len(parts) != 3:
        raise ValueError(f"Rango mal formado '{text}', se esperaba start:stop:step")
    start, stop, step = (float(item) for item in parts)
    if step <= 0:
        raise ValueError('El paso del rango debe ser positivo')
    if stop < start:
        raise ValueError('El rango requiere stop >= start')
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [float(start + i * step) for i in range(count)]


class SpectrumOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_lowest: int = Field(6, description="Número de excitaciones del condensado reportadas")

    @field_validator('n_lowest')
    def validate_n_lowest(cls, v):
        if v < 1:
            raise ValueError('n_lowest debe ser al menos 1')
        return v


class PhaseOptions(BaseModel):
    """Intervalo de |u₀| para la bisección de la frontera de defectos."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    u0_min: float = Field(1.0, description="Cota inferior de |u₀| [ω_R]")
    u0_max: float = Field(5000.0, description="Cota superior de |u₀| [ω_R]")
    tol: float = Field(1e-3, description="Tolerancia relativa de la bisección en |u₀|")

    @model_validator(mode='after')
    def validate_bounds(self):
        if not 0 < self.u0_min < self.u0_max:
            raise ValueError('Se requiere 0 < u0_min < u0_max')
        if not self.tol > 0:
            raise ValueError('tol debe ser positivo')
        return self


class OutputOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    path: Optional[str] = Field(None, description="Archivo de salida; vacío para la salida estándar")
    format: Literal["csv", "jsonl"] = Field("csv", description="Formato tabular de salida")

    @field_validator('format', mode='before')
    def normalize_format(cls, v):
        if isinstance(v, str):
            v = v.strip().lower()
            if v in ("json-lines", "jsonlines", "json_lines"):
                return "jsonl"
        return v

    @field_validator('path', mode='before')
    def empty_path(cls, v):
        if isinstance(v, str) and not v.strip():
            return None
        return v


class RunConfig(BaseModel):
    """Configuración completa de una corrida del CLI."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    params: ModelParams
    grid: GridOptions = Field(default_factory=GridOptions)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    sweep: SweepOptions = Field(default_factory=SweepOptions)
    spectrum: SpectrumOptions = Field(default_factory=SpectrumOptions)
    phase: PhaseOptions = Field(default_factory=PhaseOptions)
    output: OutputOptions = Field(default_factory=OutputOptions)

    def flatten(self) -> Dict[str, str]:
        """Claves punteadas con valores en texto, en el orden del archivo de configuración."""
        flat: Dict[str, str] = {}
        for section in ("params", "grid", "solver", "sweep", "spectrum", "phase", "output"):
            for key, value in getattr(self, section).model_dump().items():
                if value is None:
                    continue
                if isinstance(value, list):
                    value = ",".join(repr(float(item)) for item in value)
                elif isinstance(value, float):
                    value = repr(value)
                flat[f"{section}.{key}"] = str(value)
        return flat
