"""
Resultados cerrados: umbral de autoorganización, espectro de la caja,
subespacio cosθ restringido, ventana de enfriamiento por cavidad y
criterios de defectos.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from core.model import OMEGA_R, SpatialGrid, SteadyState, adiabatic_potential
from schemas.modelSchema import ModelParams
from schemas.recordSchema import SweepRecord
from schemas.solverSchema import SolverOptions
from services.exceptions import DomainError, NoTransitionError
from services.steady_state import solve_steady
from utils.runners import execute_safely

logger = logging.getLogger(__name__)

# Umbral relativo a Ω₁ bajo el cual Re λ₁ se considera nula
REAL_PART_THRESHOLD = 1e-7

# Puntos del barrido grueso de |u₀| antes de la bisección
PHASE_SCAN_POINTS = 16

# |Θ| por debajo del cual el estado se trata como homogéneo
THETA_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class QuarticRoots:
    """Raíces de la ecuación característica del subespacio cosθ."""
    roots: np.ndarray
    delta_c_eff: float
    omega1: float
    eta: float
    kappa: float

    @property
    def coefficients(self) -> np.ndarray:
        return quartic_coefficients(self.delta_c_eff, self.omega1, self.eta, self.kappa)

    def residuals(self) -> np.ndarray:
        """|P(λ)| relativo a la escala de los términos del polinomio."""
        coefficients = self.coefficients
        powers = np.abs(self.roots)[:, None] ** np.arange(4, -1, -1)[None, :]
        scale = powers @ np.abs(coefficients)
        return np.abs(np.polyval(coefficients, self.roots)) / np.maximum(scale, np.finfo(float).tiny)


def critical_eta(p: ModelParams) -> float:
    """
    Bombeo crítico η̃_c = √{[(Δ_C − u₀/2)² + κ²]/(u₀ − 2Δ_C)}·√(ω_R + 2g).

    Raises:
        NoTransitionError: Si u₀ − 2Δ_C ≤ 0 (no hay umbral real)
    """
    denominator = p.u0 - 2.0 * p.delta_c
    if denominator <= 0:
        raise NoTransitionError(f"Sin umbral de autoorganización: u₀ − 2Δ_C = {denominator} ≤ 0")
    radicand = ((p.delta_c - 0.5 * p.u0) ** 2 + p.kappa ** 2) / denominator
    return float(np.sqrt(radicand) * np.sqrt(OMEGA_R + 2.0 * p.g))


def box_spectrum(n: int, g: float) -> float:
    """Ω_n = √(n²(n² + 2g)), excitaciones de Bogoliubov del condensado homogéneo."""
    if n < 1:
        raise DomainError(f"box_spectrum requiere n ≥ 1, se recibió {n}")
    return float(np.sqrt(n ** 2 * (n ** 2 * OMEGA_R ** 2 + 2.0 * g * OMEGA_R)))


def quartic_coefficients(delta_c_eff: float, omega1: float, eta: float, kappa: float) -> np.ndarray:
    """
    Coeficientes de (λ² − Ω₁²)[(iκ + λ)² − δ_C²] − 2η̃²ω_R·δ_C, de mayor a menor grado.
    """
    delta2 = delta_c_eff ** 2
    omega2 = omega1 ** 2
    return np.array([
        1.0,
        2j * kappa,
        -(kappa ** 2 + delta2 + omega2),
        -2j * kappa * omega2,
        omega2 * (kappa ** 2 + delta2) - 2.0 * eta ** 2 * OMEGA_R * delta_c_eff,
    ], dtype=complex)


def restricted_matrix(p: ModelParams) -> np.ndarray:
    """Matriz 4×4 del subespacio (δα_a, δα_s, cosθ·δf, cosθ·δg) alrededor del estado uniforme."""
    delta = p.delta_c_eff
    return np.array([
        [-1j * p.kappa, delta, p.eta, 0.0],
        [delta, -1j * p.kappa, 0.0, 0.0],
        [0.0, 0.0, 0.0, -OMEGA_R],
        [0.0, -2.0 * p.eta, -(OMEGA_R + 2.0 * p.g), 0.0],
    ], dtype=complex)


def quartic_roots(p: ModelParams) -> QuarticRoots:
    """Raíces de la cuártica por autovalores de la matriz compañera (numpy.roots)."""
    coefficients = quartic_coefficients(p.delta_c_eff, p.omega1, p.eta, p.kappa)
    roots = np.roots(coefficients)
    roots = roots[np.lexsort((roots.imag, roots.real))]
    return QuarticRoots(roots=roots, delta_c_eff=p.delta_c_eff, omega1=p.omega1, eta=p.eta, kappa=p.kappa)


def lowest_condensate_root(p: ModelParams) -> complex:
    """
    λ₁: del par de raíces de menor módulo (rama del condensado) la de mayor Re,
    y a igual Re la menos amortiguada.
    """
    roots = quartic_roots(p).roots
    first, second = roots[np.argsort(np.abs(roots))[:2]]
    if abs(first.real - second.real) <= REAL_PART_THRESHOLD * p.omega1:
        return complex(first if first.imag >= second.imag else second)
    return complex(first if first.real > second.real else second)


def lambda1_approx(p: ModelParams) -> complex:
    """
    Aproximación de la primera frecuencia de excitación bajo el umbral.

    Re λ₁ = Ω₁√(1 − η̃²/η̃_c²), Im λ₁ = −κΩ₁²/(δ_C² + κ²)·η̃²/η̃_c².

    Raises:
        DomainError: Si η̃ > η̃_c
    """
    eta_c = critical_eta(p)
    if p.eta > eta_c:
        raise DomainError(f"lambda1_approx sólo vale bajo el umbral: η̃={p.eta} > η̃_c={eta_c}")
    delta2 = p.delta_c_eff ** 2
    omega1 = p.omega1
    if omega1 ** 2 > 0.1 * (p.kappa ** 2 + delta2):
        logger.warning(f"Ω₁²={omega1 ** 2:.4g} no es pequeño frente a κ² + δ_C²={p.kappa ** 2 + delta2:.4g}")
    ratio = (p.eta / eta_c) ** 2
    real = omega1 * np.sqrt(max(0.0, 1.0 - ratio))
    imag = -p.kappa * omega1 ** 2 / (delta2 + p.kappa ** 2) * ratio
    return complex(real, imag)


def eta_star_gap(p: ModelParams) -> float:
    """η̃_c² − η̃_*² = η̃_c²·(κΩ₁/(δ_C² + κ²))², ancho de la ventana de enfriamiento."""
    eta_c = critical_eta(p)
    return float(eta_c ** 2 * (p.kappa * p.omega1 / (p.delta_c_eff ** 2 + p.kappa ** 2)) ** 2)


def eta_star(p: ModelParams) -> float:
    """Bombeo η̃_* donde la parte real de λ₁ se anula, por bisección sobre la cuártica."""
    eta_c = critical_eta(p)
    threshold = REAL_PART_THRESHOLD * p.omega1

    def real_part(eta: float) -> float:
        return lowest_condensate_root(p.with_eta(eta)).real - threshold

    if real_part(eta_c) > 0:
        return eta_c
    return float(optimize.brentq(real_part, 0.0, eta_c, xtol=1e-12 * eta_c, rtol=1e-14))


def recommended_detuning(p: ModelParams) -> float:
    """Δ_C = u₀ − κ, condición suficiente para autoorganización."""
    return float(p.u0 - p.kappa)


def defect_criterion_asymptotic(p: ModelParams) -> bool:
    """Defectos estables en el límite de localización perfecta: |u₀| > κ."""
    return bool(abs(p.u0) > p.kappa)


def trap_frequency(state: SteadyState, p: Optional[ModelParams] = None) -> float:
    """
    Frecuencia armónica 2√k del potencial adiabático en el antinodo ocupado,
    con k = −sgn(Θ)·u1/2 − u2.

    Raises:
        DomainError: Si el estado no está organizado o el sitio no es un mínimo
    """
    p = p or state.params
    if abs(state.theta_op) < THETA_TOLERANCE:
        raise DomainError("trap_frequency requiere un estado organizado (Θ ≠ 0)")
    potential = adiabatic_potential(state, p)
    curvature = -np.sign(state.theta_op) * potential.u1 / 2.0 - potential.u2
    if curvature <= 0:
        raise DomainError(f"El antinodo ocupado no es un mínimo: k={curvature}")
    return float(2.0 * np.sqrt(curvature * OMEGA_R))


def secondary_minimum_closed_form(state: SteadyState, p: Optional[ModelParams] = None) -> bool:
    """
    Condición cerrada V″ > 0 en el antinodo complementario: (Δ_C − u₀𝓑) − |Θ|u₀ > 0.

    Para desintonía al rojo equivale a |Δ_C − u₀𝓑| < |Θ|·|u₀|.
    """
    p = p or state.params
    if abs(state.theta_op) < THETA_TOLERANCE:
        return False
    detuning = p.delta_c - p.u0 * state.bunching
    return bool(detuning - abs(state.theta_op) * p.u0 > 0)


def has_secondary_minimum(state: SteadyState, p: Optional[ModelParams] = None,
                          grid: Optional[SpatialGrid] = None, samples: int = 4096) -> bool:
    """
    Mínimo local estricto del potencial adiabático en el sitio complementario.

    Prueba local de curvatura: compara V(θ) en el antinodo opuesto al sitio del
    condensado con sus vecinos en una malla de `samples` puntos por periodo, y
    confirma con minimize_scalar que el mínimo acotado en ±8 pasos cae en su
    interior. No busca mínimos lejos de ese antinodo.
    """
    p = p or state.params
    if abs(state.theta_op) < THETA_TOLERANCE:
        return False
    potential = adiabatic_potential(state, p, grid)
    complementary = np.pi if state.theta_op > 0 else 0.0

    def evaluate(theta):
        return potential.evaluate(potential.u1, potential.u2, theta)

    spacing = 2.0 * np.pi / samples
    offsets = np.arange(-2, 3) * spacing
    local = evaluate(complementary + offsets)
    scan_minimum = bool(local[2] < local[1] and local[2] < local[3])

    window = 8.0 * spacing
    refined = optimize.minimize_scalar(evaluate, bounds=(complementary - window, complementary + window),
                                       method="bounded", options={"xatol": 1e-10})
    interior = abs(refined.x - complementary) < 0.5 * window
    found = scan_minimum and interior
    if found != secondary_minimum_closed_form(state, p):
        logger.debug(f"Muestreo y condición cerrada discrepan en η̃={p.eta}, u₀={p.u0}")
    return found


def organized_interval(eta: float, p_base: ModelParams) -> Optional[Tuple[float, float]]:
    """
    Intervalo de |u₀| (con u₀ = −|u₀|) en el que η̃ supera el umbral, a Δ_C, κ, g fijos.

    Resuelve η̃_c(u₀) = η̃ en cerrado: con x = u₀ − 2Δ_C, η̃_c² = Ω₁²(x/4 + κ²/x).
    """
    target = eta ** 2 / p_base.omega1 ** 2
    discriminant = target ** 2 - p_base.kappa ** 2
    if discriminant <= 0:
        return None
    roots = (2.0 * (target - np.sqrt(discriminant)), 2.0 * (target + np.sqrt(discriminant)))
    # |u₀| = −u₀ = −(x + 2Δ_C)
    magnitudes = sorted(-(x + 2.0 * p_base.delta_c) for x in roots)
    low, high = max(magnitudes[0], 0.0), magnitudes[1]
    if high <= low:
        return None
    return float(low), float(high)


def _defect_probe(p_base: ModelParams, eta: float, u0_abs: float, grid: SpatialGrid,
                  opts: SolverOptions) -> Optional[bool]:
    """Resuelve el estado en (η̃, −|u₀|) y evalúa el mínimo secundario; None si no convergió."""
    params = p_base.model_copy(update={"eta": float(eta), "u0": -float(u0_abs)})
    state, error = execute_safely(lambda: solve_steady(params, grid, opts), f"sonda η̃={eta}, |u₀|={u0_abs}")
    if state is None or not state.converged:
        return None
    return has_secondary_minimum(state, params, grid)


def defect_boundary_at(p_base: ModelParams, eta: float, grid: SpatialGrid, opts: SolverOptions,
                       u0_range: Tuple[float, float], tol: float = 1e-3) -> SweepRecord:
    """
    |u₀| crítico a un η̃ dado: muestreo grueso dentro del intervalo organizado y
    bisección entre la última sonda sin defectos y la primera con defectos.
    """
    columns = {"u0_abs_defect": float("nan"), "u0_abs_selforg_low": float("nan"),
               "u0_abs_selforg_high": float("nan"), "eta_c_at_boundary": float("nan"), "probes": 0}
    interval = organized_interval(eta, p_base)
    if interval is None:
        return SweepRecord(eta=eta, converged=True, status="homogeneous", **columns)
    columns["u0_abs_selforg_low"], columns["u0_abs_selforg_high"] = interval

    low = max(u0_range[0], interval[0])
    high = min(u0_range[1], interval[1])
    if high <= low:
        return SweepRecord(eta=eta, converged=True, status="out_of_range", **columns)
    margin = 1e-3 * (high - low)
    scan = np.linspace(low + margin, high - margin, PHASE_SCAN_POINTS)

    probes = 0
    last_without: Optional[float] = None
    first_with: Optional[float] = None
    failures = 0
    for u0_abs in scan:
        probes += 1
        result = _defect_probe(p_base, eta, u0_abs, grid, opts)
        if result is None:
            failures += 1
            continue
        if result:
            first_with = float(u0_abs)
            break
        last_without = float(u0_abs)

    if first_with is None:
        columns["probes"] = probes
        status = "no_defects" if failures < probes else "nonconverged"
        return SweepRecord(eta=eta, converged=failures < probes, status=status, **columns)
    if last_without is None:
        columns.update(probes=probes, u0_abs_defect=first_with)
        return SweepRecord(eta=eta, converged=True, status="below_range", **columns)

    lo, hi = last_without, first_with
    status = "ok"
    while hi - lo > tol * hi:
        # Si la sonda central no converge se prueban los cuartos del intervalo
        for fraction in (0.5, 0.25, 0.75):
            middle = lo + fraction * (hi - lo)
            probes += 1
            result = _defect_probe(p_base, eta, middle, grid, opts)
            if result is not None:
                break
        if result is None:
            status = "partial"
            break
        if result:
            hi = middle
        else:
            lo = middle

    boundary = 0.5 * (lo + hi)
    columns.update(probes=probes, u0_abs_defect=boundary)
    try:
        columns["eta_c_at_boundary"] = critical_eta(p_base.with_u0(-boundary))
    except NoTransitionError:
        pass
    return SweepRecord(eta=eta, u0=-boundary, converged=status == "ok", status=status, **columns)


def defect_phase_boundary(p_base: ModelParams, grid: SpatialGrid, opts: SolverOptions,
                          eta_values: Sequence[float], u0_range: Tuple[float, float] = (1.0, 5000.0),
                          tol: float = 1e-3, mapper: Callable = map) -> List[SweepRecord]:
    """
    Frontera de defectos en el plano (η̃, |u₀|) a Δ_C fijo, una columna de η̃ por fila.

    Cada columna es independiente y puede ejecutarse en paralelo con mapper.
    """
    logger.info(f"Trazando frontera de defectos para {len(eta_values)} valores de η̃ (Δ_C={p_base.delta_c}, κ={p_base.kappa}, g={p_base.g})")

    def column(eta: float) -> SweepRecord:
        record, error = execute_safely(lambda: defect_boundary_at(p_base, eta, grid, opts, u0_range, tol),
                                       f"frontera de defectos η̃={eta}")
        return record if record is not None else SweepRecord.failed(eta, error)

    return list(mapper(column, sorted(float(v) for v in eta_values)))
