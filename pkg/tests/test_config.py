import json

import pytest

from controllers.ConfigController import config_controller
from controllers.OutputController import output_controller
from schemas.recordSchema import SweepRecord
from schemas.runSchema import parse_range
from services.exceptions import ConfigError


def test_load_config_file(config_file):
    config = config_controller.load(config_file)
    assert config.params.u0 == -100.0
    assert config.params.eta == 100.0
    assert config.grid.n_points == 32
    assert config.sweep.values == [0.0, 10.0, 20.0]
    assert config.output.format == "csv"
    assert config.output.path is None


def test_overrides_replace_file_keys(config_file):
    config = config_controller.load(config_file, ["params.eta=80", "solver.seed_sign = -1"])
    assert config.params.eta == 80.0
    assert config.solver.seed_sign == -1


def test_sweep_values_as_comma_list(config_file):
    config = config_controller.load(config_file, ["sweep.values=30, 10,20"])
    assert config.sweep.values == [10.0, 20.0, 30.0]


def test_parse_range_includes_stop():
    assert parse_range("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("55:56:0.5") == [55.0, 55.5, 56.0]
    with pytest.raises(ValueError):
        parse_range("1:0:1")
    with pytest.raises(ValueError):
        parse_range("0:1:0")
    with pytest.raises(ValueError):
        parse_range("0:1")


@pytest.mark.parametrize("override", [
    "foo.bar=1",
    "params.zeta=1",
    "params.kappa=-1",
    "grid.n_points=2",
    "sweep.axis=g",
    "sweep.values=1:2",
    "output.format=xml",
    "solver.seed_sign=0",
])
def test_invalid_configuration_is_rejected(config_file, override):
    with pytest.raises(ConfigError) as info:
        config_controller.load(config_file, [override])
    assert info.value.exit_code == 2


def test_missing_required_parameter(tmp_path):
    path = tmp_path / "incomplete.conf"
    path.write_text("params.u0 = -100\nparams.kappa = 200\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_controller.load(path)


def test_missing_file_and_malformed_override(tmp_path, config_file):
    with pytest.raises(ConfigError):
        config_controller.load(tmp_path / "missing.conf")
    with pytest.raises(ConfigError):
        config_controller.load(config_file, ["params.eta"])


def test_echoed_output_loads_back_to_the_same_configuration(config_file, tmp_path):
    config = config_controller.load(config_file)
    target = tmp_path / "out" / "critical.csv"
    output_controller.write([SweepRecord(eta=1.0, converged=True)], config, "critical", path=str(target))
    reloaded = config_controller.load(target)
    assert reloaded.flatten() == config.flatten()


def test_jsonl_output_loads_back_to_the_same_configuration(config_file, tmp_path):
    config = config_controller.load(config_file, ["output.format=json-lines"])
    assert config.output.format == "jsonl"
    target = tmp_path / "critical.jsonl"
    output_controller.write([SweepRecord(eta=1.0, converged=True)], config, "critical", path=str(target))
    meta = json.loads(target.read_text(encoding="utf-8").splitlines()[0])["meta"]
    assert meta["command"] == "critical"
    assert config_controller.load(target).flatten() == config.flatten()


def test_echo_lines_cover_every_section(config_file):
    lines = config_controller.echo_lines(config_controller.load(config_file))
    sections = {line[2:].split(".", 1)[0] for line in lines}
    assert sections == {"params", "grid", "solver", "sweep", "spectrum", "phase", "output"}
    assert "# params.u0 = -100.0" in lines
