import numpy as np
import pytest
from scipy import stats

from core.model import uniform_grid
from schemas.modelSchema import ModelParams
from schemas.solverSchema import SolverOptions
from services.analytics import box_spectrum, critical_eta, lowest_condensate_root, quartic_roots, trap_frequency
from services.exceptions import RefusalError
from services.linear_response import (
    GAUGE_FREQUENCY_TOLERANCE,
    KIND_CONDENSATE,
    build_matrix,
    eigendecompose,
    full_rhs,
    gauge_frequency_tolerance,
    linearized_rhs,
    lowest_condensate_modes,
    mode_profiles,
    perturbation_vector,
    spectrum,
    spectrum_sweep,
    to_plus_minus,
)
from services.steady_state import solve_steady, uniform_state


@pytest.fixture
def organized_state(lossy_params):
    state = solve_steady(lossy_params.with_eta(100.0), uniform_grid(48), SolverOptions())
    assert state.converged
    return state


def _assert_pairing_symmetry(modes, matrix_norm):
    omegas = np.array([m.omega for m in modes])
    for omega in omegas:
        assert np.min(np.abs(omegas + np.conj(omega))) <= 1e-8 * matrix_norm


@pytest.mark.parametrize("eta", [0.0, 20.0, 45.0, 60.0])
def test_uniform_spectrum_contains_quartic_and_box_modes(lossy_params, grid, eta):
    p = lossy_params.with_eta(eta)
    modes = spectrum(uniform_state(p, grid))
    omegas = np.array([m.omega for m in modes])

    for root in quartic_roots(p).roots:
        assert np.min(np.abs(omegas - root)) <= 1e-6 * max(1.0, abs(root))

    for order in range(2, 6):
        frequency = box_spectrum(order, p.g)
        matches = [m for m in modes if abs(m.omega - frequency) <= 1e-8 * frequency]
        assert len(matches) == 2
        assert min(m.field_weight for m in matches) < 1e-12
        assert all(m.kind == KIND_CONDENSATE for m in matches)
        weights = sorted(m.harmonic_weight(order) for m in matches)
        assert weights[0] < 1e-10
        assert weights[1] > 0.99


def test_uniform_spectrum_has_one_gauge_pair(lossy_params, grid):
    modes = spectrum(uniform_state(lossy_params.with_eta(30.0), grid))
    assert sum(m.gauge for m in modes) == 2
    assert not any(m.flagged for m in modes)


def test_gauge_tolerance_grows_with_the_matrix_norm():
    assert gauge_frequency_tolerance(1.0) == GAUGE_FREQUENCY_TOLERANCE
    large = 1e6
    assert gauge_frequency_tolerance(large) == pytest.approx(100.0 * np.sqrt(np.finfo(float).eps) * large)
    assert gauge_frequency_tolerance(2 * large) > gauge_frequency_tolerance(large)


def test_natural_and_balanced_components_are_similar(organized_state):
    matrix = build_matrix(organized_state)
    rng = np.random.default_rng(3)
    vector = rng.normal(size=matrix.dimension) + 1j * rng.normal(size=matrix.dimension)
    np.testing.assert_allclose(matrix.to_natural(matrix.to_balanced(vector)), vector, rtol=1e-14)
    np.testing.assert_allclose(matrix.entries @ matrix.to_balanced(vector),
                               matrix.to_balanced(matrix.natural_entries() @ vector),
                               atol=1e-10 * matrix.norm * np.linalg.norm(vector))


@pytest.mark.parametrize("ratio", [0.5, 0.9, 2.0])
def test_lossless_spectrum_is_real(lossless_params, small_grid, ratio):
    p = lossless_params.with_eta(ratio * critical_eta(lossless_params))
    state = uniform_state(p, small_grid) if ratio < 1 else solve_steady(p, small_grid, SolverOptions())
    assert state.converged
    for mode in spectrum(state):
        if not mode.gauge:
            assert abs(mode.omega.imag) <= 1e-8 * max(1.0, abs(mode.omega))


def test_odd_modes_decouple_from_the_lossy_field(organized_state):
    matrix = build_matrix(organized_state)
    modes = spectrum(organized_state)
    odd = [m for m in modes if m.parity == -1 and not m.gauge]
    assert odd
    for mode in odd:
        assert mode.field_weight < 1e-10
        assert abs(mode.gamma) < 1e-8 * matrix.norm
    assert any(m.parity == -1 for m in lowest_condensate_modes(modes, 6))


def test_spectrum_sweep_reports_undamped_odd_branch(lossy_params):
    records = spectrum_sweep(lossy_params, uniform_grid(48), SolverOptions(), [100.0], n_lowest=6)
    row = records[0].as_row()
    assert row["converged"]
    assert min(abs(row[f"gamma_{k}"]) for k in range(1, 7)) < 1e-8


def test_eigenvectors_have_unit_norm_and_small_residual(organized_state):
    matrix = build_matrix(organized_state)
    for mode in eigendecompose(matrix):
        assert np.linalg.norm(mode.vector) == pytest.approx(1.0, abs=1e-12)
        residual = np.linalg.norm(matrix.entries @ mode.vector - mode.omega * mode.vector)
        assert residual <= 1e-8 * matrix.norm


def test_organized_spectrum_is_paired(organized_state):
    matrix = build_matrix(organized_state)
    modes = spectrum(organized_state)
    assert len(modes) == matrix.dimension
    _assert_pairing_symmetry(modes, matrix.norm)
    assert not any(m.flagged for m in modes if not m.gauge)
    by_index = {m.index: m for m in modes}
    for mode in modes:
        if mode.paired_with is not None:
            partner = by_index[mode.paired_with]
            assert abs(mode.omega + np.conj(partner.omega)) <= 1e-6 * max(1.0, abs(mode.omega))


def test_organized_excitations_are_damped_or_neutral(organized_state):
    for mode in spectrum(organized_state):
        if not mode.gauge:
            assert mode.gamma > -1e-8


def _smooth_direction(grid, rng):
    delta_phi = np.zeros(grid.n_points, dtype=complex)
    for order in range(5):
        delta_phi += complex(*rng.normal(size=2)) * np.cos(order * grid.theta)
        delta_phi += complex(*rng.normal(size=2)) * np.sin(order * grid.theta)
    return complex(*rng.normal(size=2)), delta_phi


@pytest.mark.parametrize("organized", [False, True])
def test_linearization_matches_finite_differences(lossy_params, organized_state, organized):
    state = organized_state if organized else uniform_state(lossy_params.with_eta(30.0), uniform_grid(48))
    matrix = build_matrix(state)
    grid, p = state.grid, state.params
    phi0, a0, mu = matrix.phi0, state.a0, state.mu
    rng = np.random.default_rng(7)
    epsilon = 1e-5

    for _ in range(5):
        delta_a, delta_phi = _smooth_direction(grid, rng)
        forward = full_rhs(phi0 + epsilon * delta_phi, a0 + epsilon * delta_a, mu, p, grid)
        backward = full_rhs(phi0 - epsilon * delta_phi, a0 - epsilon * delta_a, mu, p, grid)
        difference = perturbation_vector((forward[0] - backward[0]) / (2 * epsilon),
                                         (forward[1] - backward[1]) / (2 * epsilon))
        linear = linearized_rhs(matrix, perturbation_vector(delta_a, delta_phi))
        assert np.max(np.abs(difference - linear)) <= 1e-6 * max(1.0, np.max(np.abs(linear)))


@pytest.mark.parametrize("organized", [False, True])
def test_forward_difference_error_shrinks_linearly(lossy_params, organized_state, organized):
    state = organized_state if organized else uniform_state(lossy_params.with_eta(30.0), uniform_grid(48))
    matrix = build_matrix(state)
    grid, p = state.grid, state.params
    phi0, a0, mu = matrix.phi0, state.a0, state.mu
    base = full_rhs(phi0, a0, mu, p, grid)
    rng = np.random.default_rng(11)
    directions = [_smooth_direction(grid, rng) for _ in range(20)]

    errors = []
    for epsilon in (1e-4, 1e-5, 1e-6):
        total = 0.0
        for delta_a, delta_phi in directions:
            shifted = full_rhs(phi0 + epsilon * delta_phi, a0 + epsilon * delta_a, mu, p, grid)
            difference = perturbation_vector((shifted[0] - base[0]) / epsilon, (shifted[1] - base[1]) / epsilon)
            linear = linearized_rhs(matrix, perturbation_vector(delta_a, delta_phi))
            total += np.linalg.norm(difference - linear)
        errors.append(total)

    assert 0.05 <= errors[1] / errors[0] <= 0.3
    assert 0.05 <= errors[2] / errors[1] <= 0.3


def test_plus_minus_components_of_a_physical_perturbation(lossy_params, grid):
    delta_phi = (0.3 + 0.1j) * np.cos(grid.theta)
    vector = perturbation_vector(0.2 - 0.4j, delta_phi)
    matrix = build_matrix(uniform_state(lossy_params.with_eta(30.0), grid))
    balanced = matrix.to_balanced(vector)
    np.testing.assert_allclose(balanced[2:], vector[2:] / np.sqrt(grid.n_points), rtol=1e-14)
    a_plus, a_minus, psi_plus, psi_minus = to_plus_minus(balanced)
    assert a_plus == pytest.approx(0.2 - 0.4j)
    assert a_minus == pytest.approx(0.2 + 0.4j)
    np.testing.assert_allclose(psi_plus, delta_phi, atol=1e-14)
    np.testing.assert_allclose(psi_minus, np.conj(delta_phi), atol=1e-14)


def test_matrix_is_refused_for_unconverged_state(lossy_params, small_grid):
    state = solve_steady(lossy_params.with_eta(100.0), small_grid, SolverOptions(max_iter=5))
    with pytest.raises(RefusalError):
        build_matrix(state)


def test_lowest_modes_and_node_counts_below_threshold(lossy_params, grid):
    p = lossy_params.with_eta(30.0)
    modes = spectrum(uniform_state(p, grid))
    lowest = lowest_condensate_modes(modes, 6)
    assert len(lowest) == 6
    assert lowest[0].nu == pytest.approx(lowest_condensate_root(p).real, rel=1e-8)
    assert lowest[0].gamma > 0
    assert lowest[1].nu == pytest.approx(p.omega1, rel=1e-8)
    assert lowest[0].node_count() == 2
    assert lowest[5].nu == pytest.approx(box_spectrum(3, p.g), rel=1e-8)
    assert lowest[5].node_count() == 6


def test_mode_profiles_table(lossy_params, grid):
    state = uniform_state(lossy_params.with_eta(30.0), grid)
    modes = spectrum(state)
    table = mode_profiles(state, modes, [1, 5])
    assert list(table.columns) == ["theta", "psi_plus_re_1", "psi_plus_im_1", "psi_plus_re_5", "psi_plus_im_5"]
    assert len(table) == grid.n_points
    with pytest.raises(RefusalError):
        mode_profiles(state, modes, [0])


def test_spectrum_sweep_tracks_the_polariton_branch(lossy_params, small_grid):
    records = spectrum_sweep(lossy_params, small_grid, SolverOptions(), [20.0, 40.0], n_lowest=3)
    assert [r.eta for r in records] == [20.0, 40.0]
    for record in records:
        row = record.as_row()
        assert row["converged"]
        expected = lowest_condensate_root(lossy_params.with_eta(record.eta))
        assert row["nu_1"] == pytest.approx(expected.real, rel=1e-6)
        assert row["gamma_1"] == pytest.approx(-expected.imag, rel=1e-4)
        assert row["n_flagged"] == 0
        assert row["nu_f"] > 100


@pytest.mark.slow
def test_far_above_threshold_modes_are_trap_harmonics():
    p = ModelParams(u0=-100.0, g=0.0, delta_c=-300.0, kappa=200.0, eta=20.0 * np.sqrt(205.0))
    state = solve_steady(p, uniform_grid(256), SolverOptions())
    assert state.converged
    lowest = lowest_condensate_modes(spectrum(state), 3)
    nu = [mode.nu for mode in lowest]
    assert nu[0] == pytest.approx(trap_frequency(state), rel=0.05)
    assert nu[1] / nu[0] == pytest.approx(2.0, rel=0.05)
    assert nu[2] / nu[0] == pytest.approx(3.0, rel=0.05)


@pytest.mark.slow
def test_gauge_pair_is_found_at_very_strong_pump():
    p = ModelParams(u0=-100.0, g=0.0, delta_c=-300.0, kappa=200.0, eta=100.0 * np.sqrt(205.0))
    state = solve_steady(p, uniform_grid(256), SolverOptions())
    assert state.converged
    modes = spectrum(state)
    assert sum(m.gauge for m in modes) == 2
    assert not any(m.flagged for m in modes)
    assert lowest_condensate_modes(modes, 1)[0].nu > 100


@pytest.mark.slow
def test_trap_frequency_grows_linearly_with_pump():
    base = ModelParams(u0=-100.0, g=0.0, delta_c=-300.0, kappa=200.0)
    grid = uniform_grid(256)
    pumps = np.sqrt(205.0) * np.array([10.0, 20.0, 40.0, 70.0, 100.0])
    nu = []
    for eta in pumps:
        state = solve_steady(base.with_eta(eta), grid, SolverOptions())
        assert state.converged
        nu.append(lowest_condensate_modes(spectrum(state), 1)[0].nu)
    fit = stats.linregress(pumps, nu)
    assert fit.slope > 0
    assert fit.rvalue ** 2 > 0.999
