import logging
import sys

import click

from cli.cli import cli
from core.config import settings


def create_application() -> click.Group:
    """Función factory para crear la aplicación de línea de comandos"""
    logging.basicConfig(
        level=logging.DEBUG if settings.DEBUG else settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    return cli


app = create_application()

if __name__ == "__main__":
    app()
