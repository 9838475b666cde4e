import click

from cli.commands.common import CommandResult, command_options, eta_values, execute_command, grid_for, sweep_exit_code
from controllers.SweepController import sweep_controller
from services.linear_response import lowest_condensate_modes, mode_profiles, spectrum, spectrum_sweep
from services.steady_state import solve_steady


@click.command("spectrum")
@command_options
def spectrum_command(config_path, overrides, output_path, verbose):
    """Espectro de Bogoliubov (ν_k, γ_k y modo de campo) a lo largo de η̃."""

    def action(config):
        records = spectrum_sweep(config.params, grid_for(config), config.solver, eta_values(config, "spectrum"),
                                 n_lowest=config.spectrum.n_lowest, mapper=sweep_controller.map)
        return CommandResult(records, exit_code=sweep_exit_code(records))

    execute_command("spectrum", config_path, overrides, output_path, verbose, action)


@click.command("modes")
@command_options
def modes_command(config_path, overrides, output_path, verbose):
    """Perfiles δψ₊(θ) de las spectrum.n_lowest excitaciones más bajas en params.eta."""

    def action(config):
        state = solve_steady(config.params, grid_for(config), config.solver, raise_on_failure=True)
        modes = spectrum(state)
        available = lowest_condensate_modes(modes, config.spectrum.n_lowest)
        profiles = mode_profiles(state, modes, list(range(1, len(available) + 1)))
        return CommandResult(profiles, sort_by="theta")

    execute_command("modes", config_path, overrides, output_path, verbose, action)
