import pytest

from core.model import uniform_grid
from schemas.modelSchema import DEFECT_PARAMS, LOSSY_PARAMS, LOSSLESS_PARAMS
from schemas.solverSchema import SolverOptions


@pytest.fixture
def lossy_params():
    """u₀ = −100, g = 10, Δ_C = −300, κ = 200 (η̃_c ≈ 65.61)."""
    return LOSSY_PARAMS


@pytest.fixture
def lossless_params():
    """u₀ = −10, g = 0, Δ_C = −300, κ = 0 (η̃_c = √147.5)."""
    return LOSSLESS_PARAMS


@pytest.fixture
def defect_params():
    return DEFECT_PARAMS


@pytest.fixture
def small_grid():
    return uniform_grid(32)


@pytest.fixture
def grid():
    return uniform_grid(64)


@pytest.fixture
def solver_options():
    return SolverOptions()


@pytest.fixture
def config_text():
    return "\n".join([
        "# corrida de prueba",
        "params.u0 = -100",
        "params.g = 10",
        "params.delta_c = -300",
        "params.kappa = 200",
        "params.eta = 100",
        "grid.n_points = 32",
        "sweep.axis = eta",
        "sweep.values = 0:20:10",
        "",
    ])


@pytest.fixture
def config_file(tmp_path, config_text):
    path = tmp_path / "run.conf"
    path.write_text(config_text, encoding="utf-8")
    return path
