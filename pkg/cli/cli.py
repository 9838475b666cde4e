import click

from cli.commands import analytics, depletion, spectrum, steady
from core.config import settings


@click.group(name=settings.APP_NAME)
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
def cli():
    """
    Autoorganización de un condensado bombeado transversalmente en una cavidad con pérdidas.

    Cada subcomando lee un archivo de configuración clave = valor y escribe
    una tabla CSV (o JSON lines) con la configuración completa en el encabezado.
    """


# Registrar subcomandos
cli.add_command(steady.steady_command)
cli.add_command(steady.order_sweep_command)
cli.add_command(steady.profile_command)
cli.add_command(spectrum.spectrum_command)
cli.add_command(spectrum.modes_command)
cli.add_command(analytics.quartic_command)
cli.add_command(analytics.critical_command)
cli.add_command(analytics.phase_diagram_command)
cli.add_command(depletion.depletion_command)
