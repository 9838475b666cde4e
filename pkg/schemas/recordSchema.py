from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class SweepRecord(BaseModel):
    """
    Una fila de un barrido: entradas y observables del estado estacionario.

    Cada comando agrega sus propias columnas (espectro, depleción, frontera)
    como campos extra; el orden de inserción es el orden de las columnas.
    """
    model_config = ConfigDict(extra="allow")

    eta: float = Field(..., description="Bombeo escalado [ω_R]")
    u0: Optional[float] = Field(None, description="Corrimiento de luz colectivo [ω_R]")
    theta: Optional[float] = Field(None, description="Parámetro de orden Θ")
    bunching: Optional[float] = Field(None, description="Parámetro de agrupamiento 𝓑")
    mu: Optional[float] = Field(None, description="Potencial químico [ω_R]")
    photons_per_atom: Optional[float] = Field(None, description="|a0|², fotones por átomo")
    u1: Optional[float] = Field(None, description="Amplitud λ-periódica del potencial [ω_R]")
    u2: Optional[float] = Field(None, description="Amplitud λ/2-periódica del potencial [ω_R]")
    iterations: Optional[int] = Field(None, description="Pasos de tiempo imaginario")
    converged: bool = Field(False, description="Convergencia del punto")
    status: str = Field("ok", description="Estado del punto o marcador de error")

    @classmethod
    def failed(cls, eta: float, status: str, **extra: Any) -> "SweepRecord":
        return cls(eta=eta, converged=False, status=status, **extra)

    def as_row(self) -> Dict[str, Any]:
        return self.model_dump()
