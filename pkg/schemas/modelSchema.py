from pydantic import BaseModel, ConfigDict, Field, field_validator


class ModelParams(BaseModel):
    """
    Las cinco constantes físicas escaladas del modelo, en unidades de ω_R.

    Sólo entran las combinaciones invariantes ante el escalamiento con N:
    u0 = N·U₀, g = N·g_c/λ, eta = √N·η, además de Δ_C y κ.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    u0: float = Field(..., description="Corrimiento de luz colectivo N·U₀ [ω_R] (negativo para desintonía al rojo)")
    g: float = Field(0.0, description="Energía de colisión a densidad uniforme N·g_c/λ [ω_R]")
    delta_c: float = Field(..., description="Desintonía cavidad-bombeo Δ_C [ω_R]")
    kappa: float = Field(..., description="Tasa de decaimiento de la amplitud de la cavidad κ [ω_R]")
    eta: float = Field(0.0, description="Bombeo transversal escalado √N·η [ω_R]")

    @field_validator('kappa', 'eta', 'g')
    def validate_non_negative(cls, v, info):
        if v < 0:
            raise ValueError(f'{info.field_name} debe ser mayor o igual a cero')
        return v

    @property
    def delta_c_eff(self) -> float:
        """δ_C = −Δ_C + u₀/2, desintonía efectiva sobre el estado uniforme."""
        return -self.delta_c + 0.5 * self.u0

    @property
    def omega1(self) -> float:
        """Primera frecuencia de Bogoliubov de la caja, Ω₁ = √(1 + 2g)."""
        return (1.0 + 2.0 * self.g) ** 0.5

    def with_eta(self, eta: float) -> "ModelParams":
        return self.model_copy(update={"eta": float(eta)})

    def with_u0(self, u0: float) -> "ModelParams":
        return self.model_copy(update={"u0": float(u0)})


# Conjuntos de parámetros de referencia
LOSSY_PARAMS = ModelParams(u0=-100.0, g=10.0, delta_c=-300.0, kappa=200.0, eta=0.0)
DEFECT_PARAMS = ModelParams(u0=-1000.0, g=0.0, delta_c=-1200.0, kappa=200.0, eta=0.0)
LOSSLESS_PARAMS = ModelParams(u0=-10.0, g=0.0, delta_c=-300.0, kappa=0.0, eta=0.0)
