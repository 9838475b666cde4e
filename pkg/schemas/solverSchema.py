from pydantic import BaseModel, ConfigDict, Field, field_validator


class SolverOptions(BaseModel):
    """Opciones del solver de tiempo imaginario"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    dtau: float = Field(1e-3, description="Paso de tiempo imaginario [1/ω_R]")
    max_iter: int = Field(1_000_000, description="Número máximo de pasos de tiempo imaginario")
    tol_psi: float = Field(1e-10, description="Tolerancia del cambio de la función de onda por paso")
    tol_mu: float = Field(1e-10, description="Tolerancia relativa del residuo de la ecuación estacionaria")
    seed_epsilon: float = Field(1e-2, description="Amplitud de la semilla cosθ que rompe la simetría")
    seed_sign: int = Field(1, description="Signo de la semilla (+1 sitios pares, -1 sitios impares)")
    stagnation_window: int = Field(10_000, description="Pasos sin mejora antes de declarar estancamiento")
    polish: bool = Field(True, description="Refinamiento de Newton de la ecuación estacionaria exacta")

    @field_validator('dtau', 'tol_psi', 'tol_mu')
    def validate_positive(cls, v, info):
        if not v > 0:
            raise ValueError(f'{info.field_name} debe ser positivo')
        return v

    @field_validator('max_iter', 'stagnation_window')
    def validate_positive_int(cls, v, info):
        if v < 1:
            raise ValueError(f'{info.field_name} debe ser un entero positivo')
        return v

    @field_validator('seed_epsilon')
    def validate_seed_epsilon(cls, v):
        if abs(v) >= 1:
            raise ValueError('|seed_epsilon| debe ser menor que 1')
        return v

    @field_validator('seed_sign')
    def validate_seed_sign(cls, v):
        if v not in (1, -1):
            raise ValueError('seed_sign debe ser +1 o -1')
        return v
