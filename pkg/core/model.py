"""
Núcleo del modelo condensado-cavidad.

Convenciones: todas las frecuencias en unidades de ω_R (ω_R ≡ 1), la
coordenada es θ = kx ∈ [0, 2π) con condiciones periódicas y los productos
internos usan la medida normalizada dθ/2π, de modo que φ ≡ 1 es el estado
uniforme y el término de colisiones g|φ|² lleva g = N·g_c/λ.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
from scipy import fft

from schemas.modelSchema import ModelParams
from services.exceptions import DimensionError, SingularParameterError

logger = logging.getLogger(__name__)

# Frecuencia de retroceso, unidad de todas las frecuencias
OMEGA_R = 1.0

# Tolerancia de normalización ⟨φ|φ⟩ = 1
NORM_TOLERANCE = 1e-12

CavityAmplitude = complex


@dataclass(frozen=True)
class SpatialGrid:
    """Malla uniforme y periódica de una longitud de onda óptica."""
    n_points: int = 200

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise DimensionError(f"n_points debe ser un entero positivo, se recibió {self.n_points}")

    @cached_property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def weight(self) -> float:
        return 1.0 / self.n_points

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Números de onda enteros en el orden de la FFT."""
        return np.rint(fft.fftfreq(self.n_points, d=1.0 / self.n_points))

    @cached_property
    def cos(self) -> np.ndarray:
        return np.cos(self.theta)

    @cached_property
    def cos2(self) -> np.ndarray:
        return np.cos(self.theta) ** 2


def uniform_grid(n_points: int = 200) -> SpatialGrid:
    return SpatialGrid(n_points=n_points)


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Amplitudes complejas φ(θ_j) sobre la malla."""
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    def __len__(self) -> int:
        return len(self.values)

    def norm(self, grid: SpatialGrid) -> float:
        return float(np.real(inner_product(self.values, self.values, grid)))

    def shifted_by_half_period(self) -> "Wavefunction":
        """φ(θ) → φ(θ + π); requiere un número par de puntos."""
        n = len(self.values)
        if n % 2:
            raise DimensionError("El corrimiento de medio periodo requiere n_points par")
        return Wavefunction(np.roll(self.values, -n // 2))


WavefunctionLike = Union[Wavefunction, np.ndarray]


def as_values(phi: WavefunctionLike, grid: Optional[SpatialGrid] = None) -> np.ndarray:
    """Extrae el arreglo complejo y verifica el tamaño contra la malla."""
    values = phi.values if isinstance(phi, Wavefunction) else np.asarray(phi, dtype=complex)
    if values.ndim != 1:
        raise DimensionError(f"Se esperaba un arreglo 1D, se recibió forma {values.shape}")
    if grid is not None and values.shape[0] != grid.n_points:
        raise DimensionError(f"El arreglo tiene {values.shape[0]} puntos y la malla {grid.n_points}")
    return values


def inner_product(f: WavefunctionLike, h: WavefunctionLike, grid: SpatialGrid) -> complex:
    """
    Producto interno ⟨f|h⟩ = (1/n) Σ_j conj(f_j)·h_j con la medida dθ/2π.

    Raises:
        DimensionError: Si los arreglos no coinciden con la malla
    """
    f_values = as_values(f, grid)
    h_values = as_values(h, grid)
    return complex(np.vdot(f_values, h_values) * grid.weight)


def normalize(phi: WavefunctionLike, grid: SpatialGrid) -> Wavefunction:
    values = as_values(phi, grid)
    norm = np.sqrt(np.real(np.vdot(values, values)) * grid.weight)
    if norm == 0.0:
        raise DimensionError("No se puede normalizar una función de onda nula")
    return Wavefunction(values / norm)


def uniform_wavefunction(grid: SpatialGrid) -> Wavefunction:
    return Wavefunction(np.ones(grid.n_points, dtype=complex))


def order_parameter(phi: WavefunctionLike, grid: SpatialGrid) -> float:
    """Θ = ⟨φ|cosθ|φ⟩, parámetro de orden de la red λ-periódica."""
    values = as_values(phi, grid)
    return float(np.real(inner_product(values, grid.cos * values, grid)))


def bunching_parameter(phi: WavefunctionLike, grid: SpatialGrid) -> float:
    """𝓑 = ⟨φ|cos²θ|φ⟩, grado de localización en los antinodos."""
    values = as_values(phi, grid)
    return float(np.real(inner_product(values, grid.cos2 * values, grid)))


def _field_denominator(theta_op: float, bunching: float, p: ModelParams) -> complex:
    denominator = complex(p.delta_c - p.u0 * bunching, p.kappa)
    scale = max(1.0, abs(p.delta_c), abs(p.u0))
    if abs(denominator) <= 1e-14 * scale:
        raise SingularParameterError(
            f"Denominador del campo nulo: Δ_C={p.delta_c}, u₀𝓑={p.u0 * bunching}, κ={p.kappa}"
        )
    return denominator


def adiabatic_field(phi: WavefunctionLike, p: ModelParams, grid: SpatialGrid) -> CavityAmplitude:
    """
    Amplitud del campo eliminada adiabáticamente, a = η̃Θ / (Δ_C − u₀𝓑 + iκ).

    Args:
        phi: Función de onda normalizada
        p: Parámetros del modelo
        grid: Malla espacial

    Returns:
        Amplitud compleja por raíz de átomo, a = α/√N

    Raises:
        SingularParameterError: Si Δ_C = u₀𝓑 y κ = 0
    """
    theta_op = order_parameter(phi, grid)
    bunching = bunching_parameter(phi, grid)
    return complex(p.eta * theta_op / _field_denominator(theta_op, bunching, p))


def optical_potential(phi: WavefunctionLike, a: CavityAmplitude, p: ModelParams, grid: SpatialGrid) -> np.ndarray:
    """Potencial óptico u₀|a|²cos²θ + 2η̃·Re(a)·cosθ, sin el término de colisiones."""
    as_values(phi, grid)
    return p.u0 * abs(a) ** 2 * grid.cos2 + 2.0 * p.eta * np.real(a) * grid.cos


def apply_kinetic(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """−ω_R ∂²_θ evaluado espectralmente."""
    return fft.ifft(grid.wavenumbers ** 2 * fft.fft(values)) * OMEGA_R


def kinetic_matrix(grid: SpatialGrid) -> np.ndarray:
    """Matriz densa, real y simétrica del operador cinético espectral."""
    identity = np.eye(grid.n_points)
    k2 = (grid.wavenumbers ** 2)[:, None]
    return np.real(fft.ifft(k2 * fft.fft(identity, axis=0), axis=0)) * OMEGA_R


def gp_rhs(phi: WavefunctionLike, a: CavityAmplitude, p: ModelParams, grid: SpatialGrid) -> np.ndarray:
    """
    H[φ]·φ con H = −ω_R∂²_θ + u₀|a|²cos²θ + 2η̃·Re(a)·cosθ + g|φ|².

    Returns:
        Arreglo complejo con H[φ]φ sobre la malla
    """
    values = as_values(phi, grid)
    potential = optical_potential(values, a, p, grid) + p.g * np.abs(values) ** 2
    return apply_kinetic(values, grid) + potential * values


def hamiltonian_expectation(phi: WavefunctionLike, a: CavityAmplitude, p: ModelParams, grid: SpatialGrid) -> float:
    """Re⟨φ|H[φ]φ⟩."""
    values = as_values(phi, grid)
    return float(np.real(inner_product(values, gp_rhs(values, a, p, grid), grid)))


def cavity_rhs(phi: WavefunctionLike, a: CavityAmplitude, p: ModelParams, grid: SpatialGrid) -> complex:
    """
    Lado derecho de la ecuación del campo, da/dt = −i[(−Δ_C + u₀⟨cos²⟩ − iκ)a + η̃⟨cos⟩].

    Los valores esperados se toman sin renormalizar φ.
    """
    values = as_values(phi, grid)
    bunching = np.real(inner_product(values, grid.cos2 * values, grid))
    theta_op = np.real(inner_product(values, grid.cos * values, grid))
    detuning = complex(-p.delta_c + p.u0 * bunching, -p.kappa)
    return complex(-1j * (detuning * a + p.eta * theta_op))


@dataclass(frozen=True, eq=False)
class AdiabaticPotential:
    """Potencial autoconsistente V(θ) = u1·cosθ + u2·cos²θ [ħω_R]."""
    u1: float
    u2: float
    i0: float
    samples: np.ndarray

    @staticmethod
    def evaluate(u1: float, u2: float, theta: np.ndarray) -> np.ndarray:
        cos = np.cos(theta)
        return u1 * cos + u2 * cos ** 2


@dataclass(frozen=True, eq=False)
class SteadyState:
    """
    Estado estacionario autoconsistente del sistema condensado-cavidad.

    photons_per_atom es |a0|²; el máximo Ī₀ que un átomo puede dispersar
    se obtiene con adiabatic_potential.
    """
    phi0: Wavefunction
    a0: CavityAmplitude
    mu: float
    theta_op: float
    bunching: float
    photons_per_atom: float
    iterations: int
    residual: float
    params: ModelParams
    grid: SpatialGrid
    converged: bool = True
    status: str = "converged"

    @classmethod
    def from_wavefunction(cls, phi: WavefunctionLike, p: ModelParams, grid: SpatialGrid,
                          mu: Optional[float] = None, iterations: int = 0,
                          residual: Optional[float] = None, converged: bool = True,
                          status: str = "converged") -> "SteadyState":
        """
        Deriva todos los observables a partir de una función de onda normalizada.

        Si no se indica, μ se toma como Re⟨φ|H[φ]φ⟩ y el residuo como
        max|H[φ]φ − μφ|.
        """
        wavefunction = phi if isinstance(phi, Wavefunction) else Wavefunction(phi)
        values = as_values(wavefunction, grid)
        a0 = adiabatic_field(values, p, grid)
        if mu is None:
            mu = hamiltonian_expectation(values, a0, p, grid)
        if residual is None:
            residual = float(np.max(np.abs(gp_rhs(values, a0, p, grid) - mu * values)))
        return cls(
            phi0=wavefunction,
            a0=a0,
            mu=float(mu),
            theta_op=order_parameter(values, grid),
            bunching=bunching_parameter(values, grid),
            photons_per_atom=float(abs(a0) ** 2),
            iterations=int(iterations),
            residual=float(residual),
            params=p,
            grid=grid,
            converged=converged,
            status=status,
        )

    def density(self) -> np.ndarray:
        return np.abs(self.phi0.values) ** 2


def adiabatic_potential(state: SteadyState, p: Optional[ModelParams] = None,
                        grid: Optional[SpatialGrid] = None) -> AdiabaticPotential:
    """
    Descompone el potencial autoconsistente en sus términos λ y λ/2 periódicos.

    Ī₀ = η̃²/[(Δ_C − u₀𝓑)² + κ²], u1 = 2Θ·Ī₀·(Δ_C − u₀𝓑), u2 = Θ²·Ī₀·u₀.

    Raises:
        SingularParameterError: Si el denominador del campo se anula
    """
    p = p or state.params
    grid = grid or state.grid
    theta_op, bunching = state.theta_op, state.bunching
    denominator = _field_denominator(theta_op, bunching, p)
    detuning = denominator.real
    i0 = p.eta ** 2 / abs(denominator) ** 2
    u1 = 2.0 * theta_op * i0 * detuning
    u2 = theta_op ** 2 * i0 * p.u0
    samples = u1 * grid.cos + u2 * grid.cos2
    return AdiabaticPotential(u1=float(u1), u2=float(u2), i0=float(i0), samples=samples)
