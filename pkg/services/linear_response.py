"""
Respuesta lineal del sistema condensado-cavidad alrededor de un estado estacionario.

Base de la matriz: (δα_a, δα_s, δf, δg) con δα_a = δa₊ − δa₋, δα_s = δa₊ + δa₋,
δf = δψ₊ + δψ₋ y δg = δψ₋ − δψ₊; la evolución es i·dx/dt = M·x. Las componentes
de malla se guardan multiplicadas por √(1/n), de modo que la norma euclidiana
de un vector es |δα_a|² + |δα_s|² + ⟨δf|δf⟩ + ⟨δg|δg⟩.
"""
import dataclasses
import logging
import traceback
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from core.model import (
    CavityAmplitude,
    SpatialGrid,
    SteadyState,
    WavefunctionLike,
    as_values,
    cavity_rhs,
    gp_rhs,
    kinetic_matrix,
)
from schemas.modelSchema import ModelParams
from schemas.recordSchema import SweepRecord
from schemas.solverSchema import SolverOptions
from services.exceptions import EigensolverError, RefusalError
from services.steady_state import state_record, sweep_states
from utils.runners import execute_safely

logger = logging.getLogger(__name__)

KIND_CONDENSATE = "condensate"
KIND_FIELD = "field"

# Tolerancias de clasificación
PAIRING_TOLERANCE = 1e-6
DEGENERACY_TOLERANCE = 1e-6
GAUGE_FREQUENCY_TOLERANCE = 1e-4
# El par de fase global es un bloque de Jordan: LAPACK lo separa en ~√ε_mach·‖M‖
GAUGE_SPLIT_FACTOR = 100.0
GAUGE_OVERLAP = 0.81
RESIDUAL_TOLERANCE = 1e-8
REAL_PHASE_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class BogoliubovMatrix:
    """Matriz densa no hermítica de dimensión 2n+2 y el estado del que proviene."""
    entries: np.ndarray
    state: SteadyState
    params: ModelParams
    grid: SpatialGrid
    phi0: np.ndarray

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def scaling(self) -> np.ndarray:
        """Diagonal de la transformación de semejanza componentes naturales → base balanceada."""
        n = self.grid.n_points
        return np.concatenate([np.ones(2), np.full(2 * n, np.sqrt(self.grid.weight))])

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, ord=2))

    def natural_entries(self) -> np.ndarray:
        """Matriz en componentes naturales (valores de malla sin el peso de cuadratura)."""
        s = self.scaling
        return self.entries / s[:, None] * s[None, :]

    def to_balanced(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(vector, dtype=complex) * self.scaling

    def to_natural(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(vector, dtype=complex) / self.scaling


@dataclass(frozen=True, eq=False)
class BogoliubovMode:
    """Un autovalor ω = ν − iγ con su autovector (δα_a, δα_s, δf, δg) en la base balanceada."""
    index: int
    omega: complex
    vector: np.ndarray
    field_weight: float = 0.0
    kind: str = KIND_CONDENSATE
    paired_with: Optional[int] = None
    gauge: bool = False
    flagged: bool = False
    parity: int = 0

    @property
    def nu(self) -> float:
        return float(np.real(self.omega))

    @property
    def gamma(self) -> float:
        return float(-np.imag(self.omega))

    @property
    def n_points(self) -> int:
        return (len(self.vector) - 2) // 2

    @property
    def delta_alpha_a(self) -> complex:
        return complex(self.vector[0])

    @property
    def delta_alpha_s(self) -> complex:
        return complex(self.vector[1])

    @property
    def delta_f(self) -> np.ndarray:
        n = self.n_points
        return self.vector[2:2 + n] * np.sqrt(n)

    @property
    def delta_g(self) -> np.ndarray:
        n = self.n_points
        return self.vector[2 + n:] * np.sqrt(n)

    @property
    def delta_psi_plus(self) -> np.ndarray:
        return to_plus_minus(self.vector)[2]

    @property
    def delta_psi_minus(self) -> np.ndarray:
        return to_plus_minus(self.vector)[3]

    def harmonic_weight(self, order: int) -> float:
        """Fracción de la norma en las componentes cos(order·θ) de δf y δg."""
        n = self.n_points
        harmonic = np.sqrt(2.0 / n) * np.cos(order * 2.0 * np.pi * np.arange(n) / n)
        if order == 0:
            harmonic = np.full(n, np.sqrt(1.0 / n))
        f_part = np.vdot(harmonic, self.vector[2:2 + n])
        g_part = np.vdot(harmonic, self.vector[2 + n:])
        return float((abs(f_part) ** 2 + abs(g_part) ** 2) / np.real(np.vdot(self.vector, self.vector)))

    def node_count(self) -> int:
        """Cambios de signo periódicos de Re δψ₊ tras fijar la fase global."""
        profile = _phase_aligned(self.delta_psi_plus).real
        threshold = 1e-6 * np.max(np.abs(profile))
        signs = np.sign(profile[np.abs(profile) > threshold])
        if len(signs) < 2:
            return 0
        return int(np.sum(signs != np.roll(signs, 1)))


def _phase_aligned(values: np.ndarray) -> np.ndarray:
    pivot = values[np.argmax(np.abs(values))]
    if pivot == 0:
        return values
    return values * np.exp(-1j * np.angle(pivot))


def to_plus_minus(vector: np.ndarray) -> Tuple[complex, complex, np.ndarray, np.ndarray]:
    """
    Transforma un vector balanceado a (δa₊, δa₋, δψ₊, δψ₋) con valores de malla naturales.

    δa₊ = (δα_s + δα_a)/2, δa₋ = (δα_s − δα_a)/2, δψ₊ = (δf − δg)/2, δψ₋ = (δf + δg)/2.
    """
    vector = np.asarray(vector, dtype=complex)
    n = (len(vector) - 2) // 2
    alpha_a, alpha_s = vector[0], vector[1]
    f = vector[2:2 + n] * np.sqrt(n)
    g = vector[2 + n:] * np.sqrt(n)
    return (complex((alpha_s + alpha_a) / 2), complex((alpha_s - alpha_a) / 2), (f - g) / 2, (f + g) / 2)


def perturbation_vector(delta_a: complex, delta_phi: np.ndarray) -> np.ndarray:
    """
    Vector natural (δα_a, δα_s, δf, δg) de una perturbación física (δa, δφ).

    δα_a = 2i·Im δa, δα_s = 2·Re δa, δf = 2·Re δφ, δg = −2i·Im δφ.
    """
    delta_phi = np.asarray(delta_phi, dtype=complex)
    return np.concatenate([
        [2j * np.imag(delta_a), 2.0 * np.real(delta_a)],
        2.0 * np.real(delta_phi),
        -2j * np.imag(delta_phi),
    ])


def full_rhs(phi: WavefunctionLike, a: CavityAmplitude, mu: float, p: ModelParams,
             grid: SpatialGrid) -> Tuple[complex, np.ndarray]:
    """Lado derecho no lineal (da/dt, dφ/dt) en el marco que rota con μ."""
    values = as_values(phi, grid)
    return cavity_rhs(values, a, p, grid), -1j * (gp_rhs(values, a, p, grid) - mu * values)


def linearized_rhs(matrix: BogoliubovMatrix, vector: np.ndarray) -> np.ndarray:
    """dx/dt = −i·M·x en componentes naturales."""
    return -1j * matrix.natural_entries() @ np.asarray(vector, dtype=complex)


def _phase_fixed(state: SteadyState) -> np.ndarray:
    values = state.phi0.values
    overlap = np.sum(values)
    if abs(overlap) < 1e-12 * len(values):
        overlap = values[np.argmax(np.abs(values))]
    rotated = values * np.exp(-1j * np.angle(overlap))
    if np.max(np.abs(rotated.imag)) > REAL_PHASE_TOLERANCE * np.max(np.abs(rotated)):
        raise RefusalError("phi0 no es real tras fijar la fase global")
    return rotated.real


def build_matrix(state: SteadyState, p: Optional[ModelParams] = None,
                 grid: Optional[SpatialGrid] = None) -> BogoliubovMatrix:
    """
    Construye la matriz de Bogoliubov alrededor de un estado estacionario convergido.

    Args:
        state: Estado estacionario convergido con phi0 real salvo fase global
        p: Parámetros del modelo (por defecto los del estado)
        grid: Malla espacial (por defecto la del estado)

    Returns:
        BogoliubovMatrix en la base balanceada

    Raises:
        RefusalError: Si el estado no convergió o phi0 no es real
    """
    p = p or state.params
    grid = grid or state.grid
    if not state.converged:
        raise RefusalError(f"El estado estacionario no convergió ({state.status}); no se construye la matriz")
    phi0 = _phase_fixed(state)

    n = grid.n_points
    root_weight = np.sqrt(grid.weight)
    cos, cos2 = grid.cos, grid.cos2
    a0 = state.a0
    re_a0, im_a0 = np.real(a0), np.imag(a0)

    potential = p.u0 * abs(a0) ** 2 * cos2 + 2.0 * p.eta * re_a0 * cos
    h0 = kinetic_matrix(grid) + np.diag(p.g * phi0 ** 2 - state.mu + potential)
    re_detuning = -p.delta_c + p.u0 * state.bunching

    f_slice = slice(2, 2 + n)
    g_slice = slice(2 + n, 2 + 2 * n)
    entries = np.zeros((2 * n + 2, 2 * n + 2), dtype=complex)

    entries[0, 0] = -1j * p.kappa
    entries[0, 1] = re_detuning
    entries[1, 0] = re_detuning
    entries[1, 1] = -1j * p.kappa

    # Acoplamientos X y Y del campo con la densidad
    entries[0, f_slice] = 2.0 * root_weight * (p.u0 * re_a0 * phi0 * cos2 + p.eta * phi0 * cos)
    entries[1, f_slice] = 2j * root_weight * p.u0 * im_a0 * phi0 * cos2

    entries[f_slice, g_slice] = -h0

    entries[g_slice, 0] = 2j * root_weight * p.u0 * im_a0 * phi0 * cos2
    entries[g_slice, 1] = -2.0 * root_weight * phi0 * (p.u0 * re_a0 * cos2 + p.eta * cos)
    entries[g_slice, f_slice] = -h0 - np.diag(2.0 * p.g * phi0 ** 2)

    logger.debug(f"Matriz de Bogoliubov {entries.shape[0]}x{entries.shape[1]} construida para η̃={p.eta}")
    return BogoliubovMatrix(entries=entries, state=state, params=p, grid=grid, phi0=phi0)


def _parity_image(vectors: np.ndarray, n: int) -> np.ndarray:
    """Imagen bajo θ → −θ; las cuadraturas del campo son pares."""
    mirror = (-np.arange(n)) % n
    image = vectors.copy()
    image[2:2 + n] = vectors[2:2 + n][mirror]
    image[2 + n:] = vectors[2 + n:][mirror]
    return image


def _symmetrize_clusters(omegas: np.ndarray, vectors: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dentro de cada grupo degenerado rota los autovectores a componentes de paridad definida.

    Devuelve los vectores rotados y la paridad de cada uno (+1, −1 o 0 si es mixta).
    """
    vectors = vectors.copy()
    parity_values = np.real(np.sum(np.conj(vectors) * _parity_image(vectors, n), axis=0))
    assigned = np.zeros(len(omegas), dtype=bool)

    for i in range(len(omegas)):
        if assigned[i]:
            continue
        scale = max(1.0, abs(omegas[i]))
        cluster = np.where(~assigned & (np.abs(omegas - omegas[i]) <= DEGENERACY_TOLERANCE * scale))[0]
        assigned[cluster] = True
        if len(cluster) < 2 or np.all(np.abs(parity_values[cluster]) > 0.99):
            continue
        block = vectors[:, cluster]
        if np.min(linalg.svdvals(block)) < 1e-3:
            continue
        overlap = np.conj(block.T) @ _parity_image(block, n)
        _, rotation = linalg.eigh((overlap + np.conj(overlap.T)) / 2.0)
        rotated = block @ rotation
        rotated /= np.linalg.norm(rotated, axis=0)
        vectors[:, cluster] = rotated

    parity_values = np.real(np.sum(np.conj(vectors) * _parity_image(vectors, n), axis=0))
    parity = np.where(parity_values > 0.99, 1, np.where(parity_values < -0.99, -1, 0))
    return vectors, parity


def gauge_frequency_tolerance(matrix_norm: float) -> float:
    """Cota de |ω| para la dirección de fase global, escalada con la norma de la matriz."""
    split = GAUGE_SPLIT_FACTOR * np.sqrt(np.finfo(float).eps) * matrix_norm
    return float(max(GAUGE_FREQUENCY_TOLERANCE, split))


def _field_weight(vector: np.ndarray) -> float:
    total = np.real(np.vdot(vector, vector))
    return float((abs(vector[0]) ** 2 + abs(vector[1]) ** 2) / total) if total > 0 else 0.0


def eigendecompose(matrix: BogoliubovMatrix) -> List[BogoliubovMode]:
    """
    Todos los autovalores y autovectores derechos de la matriz (LAPACK geev).

    Los autovectores tienen norma euclidiana unitaria; los grupos degenerados
    se rotan a paridad definida y se marca la dirección de fase global.

    Raises:
        EigensolverError: Si LAPACK falla o el residuo ‖Mv − ωv‖ excede 10⁻⁸·‖M‖
    """
    entries = matrix.entries
    if not np.all(np.isfinite(entries)):
        raise EigensolverError("La matriz de Bogoliubov contiene valores no finitos")
    try:
        omegas, vectors = linalg.eig(entries, right=True)
    except (linalg.LinAlgError, ValueError) as e:
        condition = np.linalg.cond(entries)
        logger.error(f"Fallo del eigensolver: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        raise EigensolverError(f"Fallo del eigensolver denso: {e}; número de condición {condition:.3e}")

    vectors = vectors / np.linalg.norm(vectors, axis=0)
    residuals = np.linalg.norm(entries @ vectors - vectors * omegas, axis=0)
    if np.max(residuals) > RESIDUAL_TOLERANCE * matrix.norm:
        condition = np.linalg.cond(entries)
        raise EigensolverError(
            f"Residuo de autovector {np.max(residuals):.3e} > {RESIDUAL_TOLERANCE}·‖M‖; número de condición {condition:.3e}"
        )

    n = matrix.grid.n_points
    vectors, parity = _symmetrize_clusters(omegas, vectors, n)

    # Dirección de fase global (δg ∝ φ₀) y su conjugada (δf ∝ φ₀)
    gauge_phase = np.zeros(2 * n + 2)
    gauge_phase[2 + n:] = matrix.phi0
    gauge_phase /= np.linalg.norm(gauge_phase)
    gauge_number = np.zeros(2 * n + 2)
    gauge_number[2:2 + n] = matrix.phi0
    gauge_number /= np.linalg.norm(gauge_number)

    gauge_tolerance = gauge_frequency_tolerance(matrix.norm)
    modes = []
    for index, omega in enumerate(omegas):
        vector = vectors[:, index]
        gauge_weight = abs(np.vdot(gauge_phase, vector)) ** 2 + abs(np.vdot(gauge_number, vector)) ** 2
        weight = _field_weight(vector)
        modes.append(BogoliubovMode(
            index=index,
            omega=complex(omega),
            vector=vector,
            field_weight=weight,
            kind=KIND_FIELD if weight > 0.5 else KIND_CONDENSATE,
            gauge=bool(abs(omega) <= gauge_tolerance and gauge_weight >= GAUGE_OVERLAP),
            parity=int(parity[index]),
        ))
    logger.debug(f"{len(modes)} modos, {sum(m.gauge for m in modes)} de fase global")
    return modes


def classify_and_pair(modes: Sequence[BogoliubovMode], tolerance: float = PAIRING_TOLERANCE) -> List[BogoliubovMode]:
    """
    Clasifica cada modo por su peso de campo y lo empareja con su socio −ω*.

    El emparejamiento es voraz por |ω_i + conj(ω_j)| mínimo; un modo con
    Re ω ≈ 0 puede emparejarse consigo mismo. Los modos sin socio con
    |Re ω| > tolerancia quedan marcados, sin ser un error.

    Returns:
        Modos ordenados por tipo (condensado primero) y ν descendente
    """
    modes = list(modes)
    if not modes:
        return []
    omegas = np.array([m.omega for m in modes])
    scale = np.maximum(1.0, np.abs(omegas))
    distance = np.abs(omegas[:, None] + np.conj(omegas[None, :]))
    rows, cols = np.triu_indices(len(modes))
    within = distance[rows, cols] <= tolerance * np.maximum(scale[rows], scale[cols])
    rows, cols = rows[within], cols[within]
    order = np.argsort(distance[rows, cols], kind="stable")

    partner = [None] * len(modes)
    for k in order:
        i, j = int(rows[k]), int(cols[k])
        if partner[i] is not None or partner[j] is not None:
            continue
        if modes[i].gauge != modes[j].gauge:
            continue
        partner[i], partner[j] = j, i

    classified = []
    for position, mode in enumerate(modes):
        weight = _field_weight(mode.vector)
        paired = partner[position]
        flagged = paired is None and not mode.gauge and abs(mode.nu) > tolerance * scale[position]
        if flagged:
            logger.warning(f"Modo sin socio ω={mode.omega:.6g}")
        classified.append(dataclasses.replace(
            mode,
            field_weight=weight,
            kind=KIND_FIELD if weight > 0.5 else KIND_CONDENSATE,
            paired_with=modes[paired].index if paired is not None else None,
            flagged=flagged,
        ))
    classified.sort(key=lambda m: (m.kind != KIND_CONDENSATE, -m.nu))
    return classified


def spectrum(state: SteadyState) -> List[BogoliubovMode]:
    """Construcción, diagonalización y clasificación en un solo paso."""
    return classify_and_pair(eigendecompose(build_matrix(state)))


def lowest_condensate_modes(modes: Iterable[BogoliubovMode], count: int,
                            tolerance: float = PAIRING_TOLERANCE) -> List[BogoliubovMode]:
    """
    Excitaciones del condensado con ν ≥ 0, sin la dirección de fase global.

    De cada par (ω, −ω*) se conserva el miembro de frecuencia positiva.
    """
    selected = []
    for mode in modes:
        if mode.kind != KIND_CONDENSATE or mode.gauge:
            continue
        threshold = tolerance * max(1.0, abs(mode.omega))
        if mode.nu > threshold:
            selected.append(mode)
        elif abs(mode.nu) <= threshold:
            if mode.paired_with is None or mode.paired_with >= mode.index:
                selected.append(mode)
    selected.sort(key=lambda m: (m.nu, -m.gamma))
    return selected[:count]


def field_mode(modes: Iterable[BogoliubovMode]) -> Optional[BogoliubovMode]:
    """Excitación dominada por el campo con ν ≥ 0 y máximo peso de campo."""
    candidates = [m for m in modes if m.kind == KIND_FIELD and m.nu >= 0]
    if not candidates:
        return None
    return max(candidates, key=lambda m: m.field_weight)


def _track(previous: List[Optional[np.ndarray]], candidates: List[BogoliubovMode]) -> List[Optional[BogoliubovMode]]:
    """Asigna a cada rama el candidato de máximo traslape con su autovector anterior."""
    tracked: List[Optional[BogoliubovMode]] = [None] * len(previous)
    live = [i for i, vector in enumerate(previous) if vector is not None]
    if not candidates or not live:
        return tracked
    overlap = np.array([[abs(np.vdot(previous[i], c.vector)) for c in candidates] for i in live])
    rows, cols = linear_sum_assignment(-overlap)
    for row, col in zip(rows, cols):
        tracked[live[row]] = candidates[col]
    return tracked


def _spectrum_columns(branches: List[Optional[BogoliubovMode]], field: Optional[BogoliubovMode],
                      flagged: int) -> dict:
    columns = {}
    for k, mode in enumerate(branches, start=1):
        columns[f"nu_{k}"] = mode.nu if mode is not None else float("nan")
    for k, mode in enumerate(branches, start=1):
        columns[f"gamma_{k}"] = mode.gamma if mode is not None else float("nan")
    columns["nu_f"] = field.nu if field is not None else float("nan")
    columns["gamma_f"] = field.gamma if field is not None else float("nan")
    columns["n_flagged"] = flagged
    return columns


def spectrum_sweep(p: ModelParams, grid: SpatialGrid, opts: SolverOptions, eta_values: Sequence[float],
                   n_lowest: int = 6, mapper: Callable = map) -> List[SweepRecord]:
    """
    Espectro de excitaciones a lo largo de η̃, con seguimiento de ramas por traslape.

    Args:
        p: Parámetros del modelo (eta se reemplaza por cada valor del barrido)
        grid: Malla espacial
        opts: Opciones del solver
        eta_values: Valores ascendentes de η̃
        n_lowest: Número de ramas del condensado reportadas
        mapper: Función tipo map para paralelizar la diagonalización

    Returns:
        Una fila por η̃ con ν_k, γ_k de cada rama, ν_f, γ_f y observables del estado
    """
    states = sweep_states(p, grid, opts, eta_values)

    def analyse(item):
        eta, state, error = item
        if state is None:
            return eta, None, None, error
        if not state.converged:
            return eta, state, None, f"nonconverged:{state.status}"
        modes, error = execute_safely(lambda: spectrum(state), f"espectro(η̃={eta})")
        return eta, state, modes, error

    analysed = list(mapper(analyse, states))

    records = []
    previous: Optional[List[Optional[np.ndarray]]] = None
    for eta, state, modes, error in analysed:
        if modes is None:
            if state is None:
                records.append(SweepRecord.failed(eta, error, u0=p.u0))
            else:
                records.append(state_record(state).model_copy(update={"converged": False, "status": error}))
            continue

        candidates = lowest_condensate_modes(modes, 2 * n_lowest)
        if previous is None:
            branches: List[Optional[BogoliubovMode]] = list(candidates[:n_lowest])
            branches += [None] * (n_lowest - len(branches))
        else:
            branches = _track(previous, candidates)
        previous = [m.vector if m is not None else None for m in branches]

        flagged = sum(m.flagged for m in modes)
        records.append(state_record(state, **_spectrum_columns(branches, field_mode(modes), flagged)))
    return records


def mode_profiles(state: SteadyState, modes: Sequence[BogoliubovMode], indices: Sequence[int]) -> pd.DataFrame:
    """
    Perfiles δψ₊(θ) de las excitaciones seleccionadas, con la fase global fijada.

    indices se refiere a posiciones en la lista de excitaciones del condensado
    de menor frecuencia positiva (1 = la más baja).
    """
    lowest = lowest_condensate_modes(modes, max(indices) if indices else 0)
    table = {"theta": state.grid.theta}
    for position in indices:
        if position < 1 or position > len(lowest):
            raise RefusalError(f"No existe la excitación número {position}")
        mode = lowest[position - 1]
        profile = _phase_aligned(mode.delta_psi_plus)
        table[f"psi_plus_re_{position}"] = profile.real
        table[f"psi_plus_im_{position}"] = profile.imag
    return pd.DataFrame(table)
