import io
import json
import logging
import re
from pathlib import Path
from typing import Dict, Iterable, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from schemas.runSchema import RunConfig
from services.exceptions import ConfigError

logger = logging.getLogger(__name__)

SECTIONS = ("params", "grid", "solver", "sweep", "spectrum", "phase", "output")

# Línea de eco "# seccion.clave = valor" escrita al inicio de cada salida CSV
ECHO_LINE = re.compile(r"^#\s*([a-z_]+\.[a-z_0-9]+)\s*=(.*)$")
DOTTED_KEY = re.compile(r"^[a-z_]+\.[a-z_0-9]+$")


class ConfigController:
    """
    Controlador para leer y validar la configuración de una corrida.

    El archivo es texto plano clave = valor con secciones punteadas; también
    acepta un archivo de salida previo (eco de la configuración en comentarios).
    """

    def __init__(self):
        self.sections = SECTIONS

    def _prepare_text(self, text: str) -> str:
        """Descomenta las líneas de eco y descarta filas de datos de una salida previa."""
        lines = []
        for line in text.splitlines():
            stripped = line.strip()
            echo = ECHO_LINE.match(stripped)
            if echo:
                lines.append(f"{echo.group(1)}={echo.group(2).strip()}")
            elif not stripped or stripped.startswith("#"):
                continue
            elif "=" in stripped and DOTTED_KEY.match(stripped.split("=", 1)[0].strip()):
                lines.append(stripped)
        return "\n".join(lines)

    def _read_flat(self, path: Path) -> Dict[str, str]:
        if not path.is_file():
            raise ConfigError(f"No existe el archivo de configuración: {path}")
        text = path.read_text(encoding="utf-8")
        first = next((line for line in text.splitlines() if line.strip()), "")
        if first.lstrip().startswith("{"):
            try:
                meta = json.loads(first).get("meta", {})
                return {str(k): str(v) for k, v in meta.get("config", {}).items()}
            except (json.JSONDecodeError, AttributeError) as e:
                raise ConfigError(f"Encabezado JSON inválido en {path}: {e}")
        values = dotenv_values(stream=io.StringIO(self._prepare_text(text)), interpolate=False)
        return {key: value for key, value in values.items() if value is not None}

    def parse_overrides(self, overrides: Optional[Iterable[str]]) -> Dict[str, str]:
        """Convierte ['seccion.clave=valor', ...] en un diccionario plano."""
        parsed = {}
        for item in overrides or []:
            if "=" not in item:
                raise ConfigError(f"Override mal formado '{item}', se esperaba clave=valor")
            key, value = item.split("=", 1)
            key = key.strip()
            if not DOTTED_KEY.match(key):
                raise ConfigError(f"Clave de override inválida '{key}'")
            parsed[key] = value.strip()
        return parsed

    def nest(self, flat: Dict[str, str]) -> Dict[str, Dict[str, str]]:
        nested: Dict[str, Dict[str, str]] = {}
        for key, value in flat.items():
            section, name = key.split(".", 1)
            if section not in self.sections:
                raise ConfigError(f"Sección desconocida '{section}' en la clave '{key}'")
            nested.setdefault(section, {})[name] = value
        return nested

    def build(self, flat: Dict[str, str]) -> RunConfig:
        """
        Valida la configuración plana en un RunConfig.

        Raises:
            ConfigError: Si falta una clave requerida, sobra una clave o un valor es inválido
        """
        nested = self.nest(flat)
        try:
            return RunConfig.model_validate(nested)
        except ValidationError as e:
            messages = "; ".join(
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in e.errors()
            )
            logger.error(f"Configuración inválida: {messages}")
            raise ConfigError(f"Configuración inválida: {messages}")

    def load(self, path, overrides: Optional[Iterable[str]] = None) -> RunConfig:
        """
        Lee, combina con los overrides y valida un archivo de configuración.

        Args:
            path: Ruta del archivo de configuración o de una salida previa
            overrides: Lista de 'seccion.clave=valor' aplicada antes de validar

        Returns:
            RunConfig validado
        """
        flat = self._read_flat(Path(path))
        flat.update(self.parse_overrides(overrides))
        logger.info(f"Configuración leída de {path} con {len(flat)} claves")
        return self.build(flat)

    def echo_lines(self, config: RunConfig) -> list:
        """Líneas '# clave = valor' que permiten reproducir la corrida."""
        return [f"# {key} = {value}" for key, value in config.flatten().items()]


config_controller = ConfigController()  # Instancia global del controlador de configuración
