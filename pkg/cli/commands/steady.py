import click

from cli.commands.common import CommandResult, command_options, eta_values, execute_command, grid_for, sweep_exit_code
from services.exceptions import EXIT_NUMERICAL_FAILURE, EXIT_OK
from services.steady_state import density_profile, solve_steady, state_record, sweep_eta


@click.command("steady")
@command_options
def steady_command(config_path, overrides, output_path, verbose):
    """Estado estacionario en params.eta: Θ, 𝓑, μ, |a0|², u1, u2."""

    def action(config):
        state = solve_steady(config.params, grid_for(config), config.solver)
        record = state_record(state, residual=state.residual)
        return CommandResult([record], exit_code=EXIT_OK if state.converged else EXIT_NUMERICAL_FAILURE)

    execute_command("steady", config_path, overrides, output_path, verbose, action)


@click.command("order-sweep")
@command_options
def order_sweep_command(config_path, overrides, output_path, verbose):
    """Parámetro de orden a lo largo de sweep.values (η̃), con arranque en caliente."""

    def action(config):
        records = sweep_eta(config.params, grid_for(config), config.solver, eta_values(config, "order-sweep"))
        return CommandResult(records, exit_code=sweep_exit_code(records))

    execute_command("order-sweep", config_path, overrides, output_path, verbose, action)


@click.command("profile")
@command_options
def profile_command(config_path, overrides, output_path, verbose):
    """Densidad |φ₀|² y potencial adiabático V(θ) del estado en params.eta."""

    def action(config):
        state = solve_steady(config.params, grid_for(config), config.solver)
        return CommandResult(density_profile(state), sort_by="theta",
                             exit_code=EXIT_OK if state.converged else EXIT_NUMERICAL_FAILURE)

    execute_command("profile", config_path, overrides, output_path, verbose, action)
