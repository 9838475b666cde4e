import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from core.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class SweepController:
    """
    Controlador del pool de workers de los barridos.

    Los resultados se devuelven en el orden de entrada sin importar el orden
    en que terminan los workers.
    """

    def __init__(self, max_workers: int = 0):
        self.max_workers = max_workers or settings.worker_count

    def map(self, function: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self.max_workers <= 1 or len(items) <= 1:
            return [function(item) for item in items]
        workers = min(self.max_workers, len(items))
        logger.info(f"Ejecutando {len(items)} puntos con {workers} workers")
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(function, items))


sweep_controller = SweepController()  # Instancia global del controlador de barridos
