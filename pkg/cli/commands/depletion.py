import click

from cli.commands.common import CommandResult, command_options, eta_values, execute_command, grid_for, sweep_exit_code
from controllers.SweepController import sweep_controller
from services.depletion import depletion_sweep


@click.command("depletion")
@command_options
def depletion_command(config_path, overrides, output_path, verbose):
    """Depleción cuántica N′ a lo largo de η̃ (sólo κ = 0 y g = 0)."""

    def action(config):
        records = depletion_sweep(config.params, grid_for(config), config.solver, eta_values(config, "depletion"),
                                  mapper=sweep_controller.map)
        return CommandResult(records, exit_code=sweep_exit_code(records))

    execute_command("depletion", config_path, overrides, output_path, verbose, action)
