import logging
from typing import Callable

import click

from cli.commands.common import CommandResult, command_options, eta_values, execute_command, grid_for, sweep_exit_code
from controllers.SweepController import sweep_controller
from schemas.modelSchema import ModelParams
from schemas.runSchema import RunConfig
from services.analytics import (
    critical_eta,
    defect_criterion_asymptotic,
    defect_phase_boundary,
    eta_star,
    eta_star_gap,
    lambda1_approx,
    lowest_condensate_root,
    quartic_roots,
    recommended_detuning,
)
from services.exceptions import CavityError
from utils.runners import execute_safely

logger = logging.getLogger(__name__)

NAN = float("nan")


def _optional(operation: Callable[[], complex]) -> complex:
    """Valor de una fórmula o NaN fuera de su dominio."""
    try:
        return operation()
    except CavityError as e:
        logger.debug(f"Fórmula fuera de dominio: {e.detail}")
        return complex(NAN, NAN)


def quartic_row(p: ModelParams) -> dict:
    """Raíces de la cuártica, λ₁ exacta y aproximada en un valor de η̃."""
    quartic = quartic_roots(p)
    row = {"eta": p.eta}
    for k, root in enumerate(quartic.roots, start=1):
        row[f"root_{k}_re"] = float(root.real)
        row[f"root_{k}_im"] = float(root.imag)
    lambda1 = lowest_condensate_root(p)
    approx = _optional(lambda: lambda1_approx(p))
    row.update(
        lambda1_re=lambda1.real,
        lambda1_im=lambda1.imag,
        lambda1_approx_re=approx.real,
        lambda1_approx_im=approx.imag,
        eta_c=_optional(lambda: complex(critical_eta(p))).real,
        max_residual=float(quartic.residuals().max()),
        converged=True,
        status="ok",
    )
    return row


def critical_row(p: ModelParams) -> dict:
    """Umbral, ventana de enfriamiento y criterios cerrados en un punto (u₀, Δ_C, κ, g)."""
    return {
        "u0": p.u0,
        "delta_c": p.delta_c,
        "eta_c": critical_eta(p),
        "eta_star": eta_star(p),
        "eta_star_gap": eta_star_gap(p),
        "recommended_delta_c": recommended_detuning(p),
        "defects_asymptotic": defect_criterion_asymptotic(p),
        "converged": True,
        "status": "ok",
    }


def _safe_rows(values, build: Callable[[float], dict], key: str, name: str) -> list:
    rows = []
    for value in values:
        row, error = execute_safely(lambda value=value: build(value), f"{name} {key}={value}")
        rows.append(row if row is not None else {key: value, "converged": False, "status": error})
    return rows


@click.command("quartic")
@command_options
def quartic_command(config_path, overrides, output_path, verbose):
    """Raíces de la ecuación característica del subespacio cosθ a lo largo de η̃."""

    def action(config: RunConfig):
        rows = _safe_rows(eta_values(config, "quartic"), lambda eta: quartic_row(config.params.with_eta(eta)),
                          "eta", "cuártica")
        return CommandResult(rows, exit_code=sweep_exit_code(rows))

    execute_command("quartic", config_path, overrides, output_path, verbose, action)


@click.command("critical")
@command_options
def critical_command(config_path, overrides, output_path, verbose):
    """Bombeo crítico η̃_c; con sweep.axis = u0 se tabula frente a u₀."""

    def action(config: RunConfig):
        p = config.params
        if config.sweep.axis == "u0" and config.sweep.values:
            rows = _safe_rows(config.sweep.values, lambda u0: critical_row(p.with_u0(u0)), "u0", "umbral")
        else:
            rows = _safe_rows([p.u0], lambda u0: critical_row(p), "u0", "umbral")
        return CommandResult(rows, sort_by="u0", exit_code=sweep_exit_code(rows))

    execute_command("critical", config_path, overrides, output_path, verbose, action)


@click.command("phase-diagram")
@command_options
def phase_diagram_command(config_path, overrides, output_path, verbose):
    """Frontera de defectos |u₀| crítico frente a η̃ a Δ_C, κ y g fijos."""

    def action(config: RunConfig):
        records = defect_phase_boundary(config.params, grid_for(config), config.solver,
                                        eta_values(config, "phase-diagram"),
                                        u0_range=(config.phase.u0_min, config.phase.u0_max),
                                        tol=config.phase.tol, mapper=sweep_controller.map)
        return CommandResult(records, exit_code=sweep_exit_code(records))

    execute_command("phase-diagram", config_path, overrides, output_path, verbose, action)
