"""
Solver autoconsistente del estado estacionario condensado-cavidad.

El campo se elimina adiabáticamente en cada paso: la amplitud de la cavidad
se recalcula a partir de la función de onda instantánea y se inserta en el
potencial de la ecuación de Gross-Pitaevskii en tiempo imaginario.
"""
import logging
import traceback
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import fft, optimize

from core.config import settings
from core.model import (
    OMEGA_R,
    CavityAmplitude,
    SpatialGrid,
    SteadyState,
    Wavefunction,
    WavefunctionLike,
    adiabatic_field,
    adiabatic_potential,
    as_values,
    gp_rhs,
    hamiltonian_expectation,
    kinetic_matrix,
    normalize,
    optical_potential,
    order_parameter,
    uniform_grid,
    uniform_wavefunction,
)
from schemas.modelSchema import ModelParams
from schemas.recordSchema import SweepRecord
from schemas.solverSchema import SolverOptions
from services.exceptions import CavityError, DomainError, NonConvergenceError, SingularParameterError
from utils.runners import execute_safely

logger = logging.getLogger(__name__)

# Variación relativa mínima del cambio por paso dentro de una ventana
STAGNATION_RATIO = 0.01

STATUS_CONVERGED = "converged"
STATUS_STAGNATED = "stagnated"
STATUS_MAX_ITER = "max_iter"
STATUS_RESIDUAL = "residual"


@lru_cache(maxsize=8)
def _kinetic(grid: SpatialGrid) -> np.ndarray:
    return kinetic_matrix(grid)


def chemical_potential(phi: WavefunctionLike, a: CavityAmplitude, p: ModelParams, grid: SpatialGrid) -> float:
    """
    Potencial químico μ = Re⟨φ|H[φ]φ⟩.

    El término g|φ|² entra linealmente, como en la ecuación estacionaria.
    """
    return hamiltonian_expectation(phi, a, p, grid)


def residual_norm(phi: WavefunctionLike, a: CavityAmplitude, mu: float, p: ModelParams, grid: SpatialGrid) -> float:
    """max_j |H[φ]φ − μφ|."""
    values = as_values(phi, grid)
    return float(np.max(np.abs(gp_rhs(values, a, p, grid) - mu * values)))


def residual_tolerance(mu: float, opts: SolverOptions) -> float:
    return opts.tol_mu * max(abs(mu), OMEGA_R)


def initial_guess(grid: SpatialGrid, opts: SolverOptions, warm_start: Optional[WavefunctionLike] = None) -> np.ndarray:
    """
    Semilla φ ∝ base·(1 + ε·s·cosθ).

    Con warm_start la base es el estado previo, llevado a la rama de signo s
    si hace falta.
    """
    if warm_start is None:
        base = uniform_wavefunction(grid).values
    else:
        base = as_values(warm_start, grid).copy()
        theta_op = order_parameter(normalize(base, grid), grid)
        if theta_op * opts.seed_sign < 0 and grid.n_points % 2 == 0:
            base = np.roll(base, -grid.n_points // 2)
    seeded = base * (1.0 + opts.seed_epsilon * opts.seed_sign * grid.cos)
    return normalize(seeded, grid).values


def _propagate(values: np.ndarray, p: ModelParams, grid: SpatialGrid,
               opts: SolverOptions) -> Tuple[np.ndarray, int, str, float]:
    """Iteración split-step en tiempo imaginario hasta cambio < tol_psi, estancamiento o max_iter."""
    kinetic_step = np.exp(-grid.wavenumbers ** 2 * OMEGA_R * opts.dtau)
    weight = grid.weight
    reference_change = None
    window_start = 0
    change = np.inf

    for iteration in range(1, opts.max_iter + 1):
        a = adiabatic_field(values, p, grid)
        potential = np.real(optical_potential(values, a, p, grid)) + p.g * np.abs(values) ** 2
        half_step = np.exp(-(potential - potential.min()) * opts.dtau / 2.0)

        updated = half_step * fft.ifft(kinetic_step * fft.fft(half_step * values))
        updated /= np.sqrt(np.real(np.vdot(updated, updated)) * weight)

        change = float(np.max(np.abs(updated - values)))
        values = updated

        if change < opts.tol_psi:
            return values, iteration, STATUS_CONVERGED, change

        if reference_change is None:
            reference_change, window_start = change, iteration
        elif iteration - window_start >= opts.stagnation_window:
            if abs(change / reference_change - 1.0) < STAGNATION_RATIO:
                logger.warning(f"Estancamiento tras {iteration} pasos: cambio por paso {change:.3e}")
                return values, iteration, STATUS_STAGNATED, change
            reference_change, window_start = change, iteration

    logger.warning(f"Se alcanzó max_iter={opts.max_iter} con cambio por paso {change:.3e}")
    return values, opts.max_iter, STATUS_MAX_ITER, change


def _stationary_equations(x: np.ndarray, p: ModelParams, grid: SpatialGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ecuaciones H[φ]φ − μφ = 0 y ⟨φ|φ⟩ − 1 = 0 para φ real, con su jacobiano analítico.

    Incógnitas: x = (φ_0, ..., φ_{n-1}, μ).
    """
    n = grid.n_points
    w = grid.weight
    cos, cos2 = grid.cos, grid.cos2
    phi, mu = x[:n], x[n]
    phi2 = phi ** 2

    theta_op = w * np.dot(cos, phi2)
    bunching = w * np.dot(cos2, phi2)
    detuning = p.delta_c - p.u0 * bunching
    denominator = detuning ** 2 + p.kappa ** 2
    if denominator == 0.0:
        raise SingularParameterError("Denominador del campo nulo durante el refinamiento")

    photons = p.eta ** 2 * theta_op ** 2 / denominator
    re_a = p.eta * theta_op * detuning / denominator
    potential = p.u0 * photons * cos2 + 2.0 * p.eta * re_a * cos

    kinetic = _kinetic(grid)
    equations = np.empty(n + 1)
    equations[:n] = kinetic @ phi + (potential + p.g * phi2 - mu) * phi
    equations[n] = w * np.sum(phi2) - 1.0

    # Derivadas de |a|² y Re(a) respecto de Θ y 𝓑
    d_photons_d_theta = 2.0 * p.eta ** 2 * theta_op / denominator
    d_photons_d_bunching = 2.0 * p.u0 * detuning * p.eta ** 2 * theta_op ** 2 / denominator ** 2
    d_re_a_d_theta = p.eta * detuning / denominator
    d_re_a_d_bunching = -p.u0 * p.eta * theta_op * (p.kappa ** 2 - detuning ** 2) / denominator ** 2

    d_potential_d_theta = p.u0 * d_photons_d_theta * cos2 + 2.0 * p.eta * d_re_a_d_theta * cos
    d_potential_d_bunching = p.u0 * d_photons_d_bunching * cos2 + 2.0 * p.eta * d_re_a_d_bunching * cos

    jacobian = np.zeros((n + 1, n + 1))
    jacobian[:n, :n] = kinetic + np.diag(potential + 3.0 * p.g * phi2 - mu)
    jacobian[:n, :n] += np.outer(phi * d_potential_d_theta, 2.0 * w * cos * phi)
    jacobian[:n, :n] += np.outer(phi * d_potential_d_bunching, 2.0 * w * cos2 * phi)
    jacobian[:n, n] = -phi
    jacobian[n, :n] = 2.0 * w * phi
    return equations, jacobian


def _polish(values: np.ndarray, mu: float, p: ModelParams, grid: SpatialGrid) -> Tuple[np.ndarray, float]:
    """Refinamiento de Newton de la ecuación estacionaria exacta a partir del iterado split-step."""
    x0 = np.concatenate([np.real(values), [mu]])
    solution = optimize.root(_stationary_equations, x0, args=(p, grid), jac=True, method="hybr",
                             options={"xtol": 1e-13})
    if not solution.success:
        logger.debug(f"Refinamiento de Newton sin éxito formal: {solution.message}")
    phi = normalize(solution.x[:grid.n_points], grid).values
    return phi, float(solution.x[grid.n_points])


def solve_steady(p: ModelParams, grid: Optional[SpatialGrid] = None, opts: Optional[SolverOptions] = None,
                 warm_start: Optional[WavefunctionLike] = None, raise_on_failure: bool = False) -> SteadyState:
    """
    Resuelve el estado estacionario autoconsistente por propagación en tiempo imaginario.

    Args:
        p: Parámetros del modelo
        grid: Malla espacial (por defecto settings.DEFAULT_GRID_POINTS puntos)
        opts: Opciones del solver
        warm_start: Función de onda inicial opcional (barridos)
        raise_on_failure: Lanzar NonConvergenceError en lugar de devolver un estado no convergido

    Returns:
        SteadyState con converged y status explícitos

    Raises:
        SingularParameterError: Si el denominador del campo se anula
        NonConvergenceError: Sólo con raise_on_failure=True
    """
    grid = grid or uniform_grid(settings.DEFAULT_GRID_POINTS)
    opts = opts or SolverOptions()
    try:
        logger.info(f"Resolviendo estado estacionario η̃={p.eta}, u₀={p.u0}, Δ_C={p.delta_c}, κ={p.kappa}, g={p.g}")
        values = initial_guess(grid, opts, warm_start)
        values, iterations, status, change = _propagate(values, p, grid, opts)

        a0 = adiabatic_field(values, p, grid)
        mu = chemical_potential(values, a0, p, grid)
        if status == STATUS_CONVERGED and opts.polish:
            polished, _ = _polish(values, mu, p, grid)
            a_polished = adiabatic_field(polished, p, grid)
            mu_polished = chemical_potential(polished, a_polished, p, grid)
            if residual_norm(polished, a_polished, mu_polished, p, grid) <= residual_norm(values, a0, mu, p, grid):
                values, a0, mu = polished, a_polished, mu_polished

        residual = residual_norm(values, a0, mu, p, grid)
        if status == STATUS_CONVERGED and residual > residual_tolerance(mu, opts):
            status = STATUS_RESIDUAL
        converged = status == STATUS_CONVERGED

        state = SteadyState.from_wavefunction(values, p, grid, mu=mu, iterations=iterations,
                                              residual=residual, converged=converged, status=status)
        if converged:
            logger.info(f"Convergió en {iterations} pasos: Θ={state.theta_op:.6g}, μ={state.mu:.6g}, residuo={residual:.2e}")
        else:
            logger.warning(f"Sin convergencia ({status}) tras {iterations} pasos: cambio={change:.2e}, residuo={residual:.2e}")
            if raise_on_failure:
                raise NonConvergenceError(f"El solver no convergió ({status}) para η̃={p.eta}", last_iterate=state)
        return state

    except CavityError:
        raise
    except Exception as e:
        logger.error(f"Error en solve_steady: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        raise NonConvergenceError(f"Fallo inesperado del solver: {e}")


def uniform_state(p: ModelParams, grid: Optional[SpatialGrid] = None) -> SteadyState:
    """Solución trivial exacta φ ≡ 1, a = 0, μ = g, sin iterar."""
    grid = grid or uniform_grid(settings.DEFAULT_GRID_POINTS)
    return SteadyState.from_wavefunction(uniform_wavefunction(grid), p, grid, iterations=0)


def state_record(state: SteadyState, **extra) -> SweepRecord:
    """Fila de barrido con los observables de un estado estacionario."""
    potential = adiabatic_potential(state)
    return SweepRecord(
        eta=state.params.eta,
        u0=state.params.u0,
        theta=state.theta_op,
        bunching=state.bunching,
        mu=state.mu,
        photons_per_atom=state.photons_per_atom,
        u1=potential.u1,
        u2=potential.u2,
        iterations=state.iterations,
        converged=state.converged,
        status=state.status,
        **extra,
    )


def _ensure_ascending(values: Sequence[float]) -> List[float]:
    values = [float(v) for v in values]
    if any(b < a for a, b in zip(values, values[1:])):
        raise DomainError("Los valores de η̃ deben estar ordenados de forma ascendente")
    return values


def sweep_states(p: ModelParams, grid: SpatialGrid, opts: SolverOptions,
                 eta_values: Sequence[float]) -> List[Tuple[float, Optional[SteadyState], Optional[str]]]:
    """
    Estados estacionarios a lo largo de η̃ con arranque en caliente.

    Devuelve (η̃, estado o None, marcador de error o None) por punto.
    """
    results = []
    previous: Optional[Wavefunction] = None
    for eta in _ensure_ascending(eta_values):
        state, error = execute_safely(
            lambda eta=eta, previous=previous: solve_steady(p.with_eta(eta), grid, opts, warm_start=previous),
            f"solve_steady(η̃={eta})",
        )
        results.append((eta, state, error))
        if state is not None and state.converged:
            previous = state.phi0
    return results


def sweep_eta(p: ModelParams, grid: SpatialGrid, opts: SolverOptions,
              eta_values: Sequence[float]) -> List[SweepRecord]:
    """Barrido del parámetro de orden en η̃; los fallos quedan marcados en la fila."""
    records = []
    for eta, state, error in sweep_states(p, grid, opts, eta_values):
        if state is None:
            records.append(SweepRecord.failed(eta, error, u0=p.u0))
        else:
            records.append(state_record(state))
    return records


def density_profile(state: SteadyState) -> pd.DataFrame:
    """Tabla θ, |φ₀|², V(θ) del estado estacionario."""
    potential = adiabatic_potential(state)
    return pd.DataFrame({
        "theta": state.grid.theta,
        "density": state.density(),
        "potential": potential.samples,
    })
