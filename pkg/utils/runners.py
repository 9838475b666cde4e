import logging
import traceback
from typing import Callable, Optional, Tuple, TypeVar

from services.exceptions import CavityError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def failure_marker(error: Exception) -> str:
    """Marcador de error para la columna status de una fila."""
    detail = error.detail if isinstance(error, CavityError) else str(error)
    return f"error:{type(error).__name__}: {detail}"


def execute_safely(operation: Callable[[], T], operation_name: str) -> Tuple[Optional[T], Optional[str]]:
    """
    Ejecuta una operación numérica de manera segura capturando errores.

    Args:
        operation: Función sin argumentos a ejecutar
        operation_name: Nombre de la operación para logging

    Returns:
        Tupla (resultado, None) si tuvo éxito o (None, marcador de error)
    """
    try:
        logger.debug(f"Iniciando {operation_name}...")
        result = operation()
        logger.debug(f"{operation_name} ejecutado exitosamente")
        return result, None
    except CavityError as e:
        logger.warning(f"Fallo numérico en {operation_name}: {e.detail}")
        return None, failure_marker(e)
    except Exception as e:
        logger.error(f"Error inesperado en {operation_name}: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        return None, failure_marker(e)
