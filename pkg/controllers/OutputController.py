import json
import logging
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

from controllers.ConfigController import config_controller
from core.config import settings
from schemas.recordSchema import SweepRecord
from schemas.runSchema import RunConfig
from services.exceptions import ConfigError

logger = logging.getLogger(__name__)

Rows = Union[pd.DataFrame, Iterable[Union[SweepRecord, dict]]]


class OutputController:
    """
    Controlador para escribir tablas de resultados en CSV o JSON lines.

    Cada salida CSV empieza con comentarios '#' que identifican la versión,
    el comando, las unidades y la configuración completa de la corrida.
    """

    def __init__(self):
        self.float_format = f"%.{settings.FLOAT_DIGITS}g"
        self.units_note = "# units: every frequency column is in units of the recoil frequency omega_R"

    def to_frame(self, rows: Rows, sort_by: Optional[str] = None) -> pd.DataFrame:
        if isinstance(rows, pd.DataFrame):
            frame = rows.copy()
        else:
            frame = pd.DataFrame([row.as_row() if isinstance(row, SweepRecord) else dict(row) for row in rows])
        if sort_by and sort_by in frame.columns and len(frame) > 1:
            frame = frame.sort_values(sort_by, kind="mergesort").reset_index(drop=True)
        return frame

    def header_lines(self, config: RunConfig, command: str) -> List[str]:
        lines = [f"# {settings.APP_NAME} version={settings.APP_VERSION} command={command}", self.units_note]
        return lines + config_controller.echo_lines(config)

    def render(self, frame: pd.DataFrame, config: RunConfig, command: str) -> str:
        """Texto completo de la salida en el formato configurado."""
        if config.output.format == "jsonl":
            meta = {"meta": {"app": settings.APP_NAME, "version": settings.APP_VERSION,
                             "command": command, "config": config.flatten()}}
            body = frame.to_json(orient="records", lines=True, double_precision=settings.FLOAT_DIGITS)
            body = body if body.endswith("\n") or not body else body + "\n"
            return json.dumps(meta, ensure_ascii=False) + "\n" + body
        header = "\n".join(self.header_lines(config, command)) + "\n"
        body = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n", na_rep="nan")
        return header + body

    def write(self, rows: Rows, config: RunConfig, command: str, sort_by: Optional[str] = None,
              path: Optional[str] = None) -> str:
        """
        Escribe la tabla en output.path (o en la salida estándar si no hay ruta).

        Returns:
            Texto escrito
        """
        frame = self.to_frame(rows, sort_by)
        text = self.render(frame, config, command)
        target = path or config.output.path
        if target:
            try:
                Path(target).parent.mkdir(parents=True, exist_ok=True)
                with open(target, "w", encoding="utf-8", newline="\n") as handle:
                    handle.write(text)
            except OSError as e:
                raise ConfigError(f"No se pudo escribir la salida en {target}: {e}")
            logger.info(f"{len(frame)} filas escritas en {target}")
        else:
            sys.stdout.write(text)
            sys.stdout.flush()
        return text


output_controller = OutputController()  # Instancia global del controlador de salida
