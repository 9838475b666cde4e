from typing import Any, Optional

# Códigos de salida del CLI
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


class CavityError(Exception):
    """
    Error base del proyecto.

    Igual que un HTTPException lleva status_code y detail, cada error
    lleva el código de salida que el CLI debe devolver y un detalle legible.
    """

    exit_code: int = EXIT_NUMERICAL_FAILURE

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class ConfigError(CavityError):
    """Configuración inválida o mal formada."""
    exit_code = EXIT_CONFIG_ERROR


class DimensionError(CavityError):
    """Arreglos que no coinciden con el tamaño de la malla."""


class SingularParameterError(CavityError):
    """Denominador del campo adiabático idénticamente cero (Δ_C = u₀𝓑 y κ = 0)."""


class NoTransitionError(CavityError):
    """Parámetros sin umbral real de autoorganización."""


class DomainError(CavityError):
    """Argumento fuera del dominio de validez de una fórmula."""


class NonConvergenceError(CavityError):
    """
    El solver no convergió.

    Conserva el último iterado para diagnóstico; nunca se devuelve
    una respuesta silenciosa.
    """

    def __init__(self, detail: str, last_iterate: Any = None):
        super().__init__(detail)
        self.last_iterate = last_iterate


class RefusalError(CavityError):
    """Estado estacionario no apto para construir la matriz de Bogoliubov."""


class EigensolverError(CavityError):
    """Fallo del eigensolver denso, con diagnóstico de condicionamiento."""


class UnsupportedRegimeError(CavityError):
    """Régimen de parámetros no soportado por la operación."""


class NumericalDegeneracyError(CavityError):
    """Modo con norma simpléctica nula lejos del punto crítico."""
