"""
Depleción cuántica N′ del condensado en la cavidad sin pérdidas (κ = 0, g = 0).

Los modos físicos son los de norma simpléctica positiva
⟨δψ₊|δψ₊⟩ − ⟨δψ₋|δψ₋⟩ + |δa₊|² − |δa₋|²; cada grupo degenerado se
ortonormaliza simplécticamente (Löwdin) y N′ suma el peso ⟨δψ₋|δψ₋⟩.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from core.model import OMEGA_R, SpatialGrid, SteadyState
from schemas.modelSchema import ModelParams
from schemas.recordSchema import SweepRecord
from schemas.solverSchema import SolverOptions
from services.analytics import critical_eta, lowest_condensate_root
from services.exceptions import NoTransitionError, NumericalDegeneracyError, UnsupportedRegimeError
from services.linear_response import BogoliubovMode, spectrum, to_plus_minus
from services.steady_state import solve_steady, state_record, uniform_state
from utils.runners import execute_safely

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-6
# Norma simpléctica relativa bajo la cual un modo se considera degenerado
NORM_TOLERANCE = 1e-10
# Frecuencia bajo la cual una norma nula se atribuye al punto crítico
CRITICAL_FREQUENCY = 1e-6
# Regularización de λ₁ en la ley asintótica
MIN_LAMBDA1 = 1e-6


@dataclass(frozen=True)
class DepletionResult:
    n_prime: float
    eta: float
    per_mode: List[Tuple[int, float]] = field(default_factory=list)


def _mode_components(mode: BogoliubovMode, weight: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vector de componentes (δa₊, δa₋, √w·δψ₊, √w·δψ₋) y su firma simpléctica."""
    a_plus, a_minus, psi_plus, psi_minus = to_plus_minus(mode.vector)
    root = np.sqrt(weight)
    components = np.concatenate([[a_plus], root * psi_plus, [a_minus], root * psi_minus])
    n = len(psi_plus)
    signature = np.concatenate([np.ones(1 + n), -np.ones(1 + n)])
    return components, signature


def _clusters(modes: Sequence[BogoliubovMode]) -> List[List[BogoliubovMode]]:
    remaining = list(modes)
    groups = []
    while remaining:
        head = remaining.pop(0)
        scale = DEGENERACY_TOLERANCE * max(1.0, abs(head.omega))
        group = [head] + [m for m in remaining if abs(m.omega - head.omega) <= scale]
        remaining = [m for m in remaining if abs(m.omega - head.omega) > scale]
        groups.append(group)
    return groups


def _cluster_contributions(group: List[BogoliubovMode], weight: float) -> List[Tuple[int, float]]:
    """
    Aporte ⟨δψ₋|δψ₋⟩ de cada modo físico de un grupo degenerado.

    Con la matriz de Gram simpléctica G y la de pesos W, el total es tr(G⁻¹W);
    si G es definida positiva se reparte con la ortonormalización de Löwdin.
    """
    columns, signature = zip(*(_mode_components(m, weight) for m in group))
    vectors = np.column_stack(columns)
    sigma = signature[0]
    n = (len(sigma) - 2) // 2
    depleted = np.zeros_like(sigma)
    depleted[n + 2:] = 1.0

    gram = np.conj(vectors.T) @ (sigma[:, None] * vectors)
    gram = (gram + np.conj(gram.T)) / 2.0
    weights = np.conj(vectors.T) @ (depleted[:, None] * vectors)
    weights = (weights + np.conj(weights.T)) / 2.0

    scale = np.real(np.trace(np.conj(vectors.T) @ vectors))
    norms, basis = linalg.eigh(gram)
    if np.any(np.abs(norms) <= NORM_TOLERANCE * scale):
        frequency = abs(group[0].omega)
        if frequency > CRITICAL_FREQUENCY:
            raise NumericalDegeneracyError(
                f"Modo con norma simpléctica nula lejos del punto crítico: ω={group[0].omega:.6g}"
            )
        logger.warning(f"Norma simpléctica nula en ω={group[0].omega:.3g}; se omite del conteo")
        return []

    if np.all(norms > 0):
        lowdin = basis @ np.diag(norms ** -0.5) @ np.conj(basis.T)
        contributions = np.real(np.diag(np.conj(lowdin.T) @ weights @ lowdin))
        return [(m.index, float(c)) for m, c in zip(group, contributions)]

    projected = np.real(np.diag(np.conj(basis.T) @ weights @ basis))
    return [(group[k].index, float(projected[k] / norms[k])) for k in range(len(group)) if norms[k] > 0]


def quantum_depletion(state: SteadyState, p: Optional[ModelParams] = None,
                      grid: Optional[SpatialGrid] = None) -> DepletionResult:
    """
    Número de átomos fuera del condensado a partir de los autovectores de Bogoliubov.

    Args:
        state: Estado estacionario convergido
        p: Parámetros (por defecto los del estado); se exige κ = 0 y g = 0
        grid: Malla espacial (por defecto la del estado)

    Returns:
        DepletionResult con N′ y el aporte de cada modo

    Raises:
        UnsupportedRegimeError: Si κ ≠ 0 o g ≠ 0
        NumericalDegeneracyError: Si un modo lejos del punto crítico tiene norma simpléctica nula
    """
    p = p or state.params
    grid = grid or state.grid
    if p.kappa != 0 or p.g != 0:
        raise UnsupportedRegimeError(f"La depleción sólo se calcula con κ = 0 y g = 0 (κ={p.kappa}, g={p.g})")

    modes = [m for m in spectrum(state) if not m.gauge]
    per_mode: List[Tuple[int, float]] = []
    for group in _clusters(modes):
        per_mode.extend(_cluster_contributions(group, grid.weight))

    per_mode = [(index, max(value, 0.0)) for index, value in per_mode]
    n_prime = float(sum(value for _, value in per_mode))
    logger.info(f"Depleción cuántica en η̃={p.eta}: N′={n_prime:.6g}")
    return DepletionResult(n_prime=n_prime, eta=p.eta, per_mode=per_mode)


def asymptotic_law(p: ModelParams) -> float:
    """ω_R/(8λ₁) con λ₁ de la cuártica conservativa; NaN fuera de su dominio."""
    lambda1 = _real_lambda1(p)
    return OMEGA_R / (8.0 * lambda1) if lambda1 is not None else float("nan")


def single_mode_law(p: ModelParams) -> float:
    """(ω_R − λ₁)²/(4ω_Rλ₁), depleción de un único modo cosθ acoplado."""
    lambda1 = _real_lambda1(p)
    if lambda1 is None:
        return float("nan")
    return (OMEGA_R - lambda1) ** 2 / (4.0 * OMEGA_R * lambda1)


def _real_lambda1(p: ModelParams) -> Optional[float]:
    try:
        if p.eta >= critical_eta(p):
            return None
    except NoTransitionError:
        return None
    lambda1 = lowest_condensate_root(p).real
    return lambda1 if lambda1 > MIN_LAMBDA1 else None


def depletion_sweep(p: ModelParams, grid: SpatialGrid, opts: SolverOptions, eta_values: Sequence[float],
                    mapper: Callable = map) -> List[SweepRecord]:
    """
    N′ a lo largo de η̃ con las columnas de las leyes asintótica y de un modo.

    Bajo el umbral el estado uniforme es la solución exacta y no se itera;
    sobre el umbral cada punto se resuelve de forma independiente.
    """
    if p.kappa != 0 or p.g != 0:
        raise UnsupportedRegimeError(f"La depleción sólo se calcula con κ = 0 y g = 0 (κ={p.kappa}, g={p.g})")
    try:
        eta_c = critical_eta(p)
    except NoTransitionError:
        eta_c = float("inf")

    def point(eta: float) -> SweepRecord:
        params = p.with_eta(eta)

        def compute():
            state = uniform_state(params, grid) if eta < eta_c else solve_steady(params, grid, opts)
            if not state.converged:
                return state_record(state, n_prime=float("nan"), asymptotic_law=float("nan"),
                                    single_mode_law=float("nan"))
            result = quantum_depletion(state, params, grid)
            return state_record(state, n_prime=result.n_prime, asymptotic_law=asymptotic_law(params),
                                single_mode_law=single_mode_law(params))

        record, error = execute_safely(compute, f"depleción η̃={eta}")
        return record if record is not None else SweepRecord.failed(eta, error, u0=p.u0)

    return list(mapper(point, sorted(float(v) for v in eta_values)))
