import logging
import traceback
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional

import click

from controllers.ConfigController import config_controller
from controllers.OutputController import Rows, output_controller
from core.model import SpatialGrid, uniform_grid
from schemas.recordSchema import SweepRecord
from schemas.runSchema import RunConfig
from services.exceptions import EXIT_NUMERICAL_FAILURE, EXIT_OK, CavityError, ConfigError

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    """Tabla producida por un comando, columna de orden y código de salida."""
    rows: Rows
    sort_by: Optional[str] = "eta"
    exit_code: int = EXIT_OK


def command_options(function: Callable) -> Callable:
    """Argumento CONFIG y opciones comunes a todos los subcomandos."""
    decorators = [
        click.argument("config_path", metavar="CONFIG", type=click.Path(dir_okay=False)),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                     help="Sobrescribe una clave del archivo (repetible), p. ej. --set params.eta=80"),
        click.option("--output", "-o", "output_path", default=None, metavar="PATH",
                     help="Archivo de salida; sustituye output.path"),
        click.option("--verbose", "-v", count=True, help="-v para INFO, -vv para DEBUG"),
    ]
    for decorator in reversed(decorators):
        function = decorator(function)
    return function


def configure_verbosity(verbose: int) -> None:
    if verbose >= 2:
        logging.getLogger().setLevel(logging.DEBUG)
    elif verbose == 1:
        logging.getLogger().setLevel(logging.INFO)


def grid_for(config: RunConfig) -> SpatialGrid:
    return uniform_grid(config.grid.n_points)


def eta_values(config: RunConfig, command: str) -> List[float]:
    """Valores de η̃ del barrido; sin valores se usa params.eta."""
    if config.sweep.axis != "eta":
        raise ConfigError(f"El comando {command} sólo admite sweep.axis = eta (se recibió {config.sweep.axis})")
    return list(config.sweep.values) or [config.params.eta]


def row_failed(row) -> bool:
    if isinstance(row, SweepRecord):
        return not row.converged
    return not dict(row).get("converged", True)


def sweep_exit_code(rows: Iterable) -> int:
    """Código 3 sólo si todas las filas fallaron."""
    rows = list(rows)
    if rows and all(row_failed(row) for row in rows):
        return EXIT_NUMERICAL_FAILURE
    return EXIT_OK


def execute_command(command: str, config_path: str, overrides, output_path: Optional[str], verbose: int,
                    action: Callable[[RunConfig], CommandResult]) -> None:
    """
    Carga la configuración, ejecuta la acción y escribe la tabla.

    Los errores del proyecto terminan con su propio código de salida
    (2 configuración, 3 fallo numérico); nunca se escribe una tabla parcial
    silenciosa.
    """
    configure_verbosity(verbose)
    try:
        config = config_controller.load(config_path, overrides)
        if output_path:
            config = config.model_copy(update={"output": config.output.model_copy(update={"path": output_path})})
        logger.info(f"Ejecutando {command} con {config_path}")
        result = action(config)
        output_controller.write(result.rows, config, command, sort_by=result.sort_by)
        exit_code = result.exit_code
    except CavityError as e:
        logger.error(f"{command}: {e.detail}")
        click.echo(f"Error: {e.detail}", err=True)
        exit_code = e.exit_code
    except Exception as e:
        logger.error(f"Error inesperado en {command}: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        click.echo(f"Error: {e}", err=True)
        exit_code = EXIT_NUMERICAL_FAILURE
    click.get_current_context().exit(exit_code)
