import io

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from cli.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def _table(text):
    return pd.read_csv(io.StringIO(text), comment="#")


def test_critical_command(runner, config_file):
    result = runner.invoke(cli, ["critical", str(config_file)])
    assert result.exit_code == 0, result.stderr
    table = _table(result.stdout)
    assert len(table) == 1
    assert table["eta_c"][0] == pytest.approx(65.612, rel=5e-4)
    assert table["recommended_delta_c"][0] == pytest.approx(-300.0)
    assert "# params.kappa = 200.0" in result.stdout.splitlines()


def test_set_override(runner, config_file):
    result = runner.invoke(cli, ["critical", str(config_file), "--set", "params.g=0"])
    assert result.exit_code == 0, result.stderr
    assert _table(result.stdout)["eta_c"][0] == pytest.approx(np.sqrt(205.0), rel=1e-10)


def test_critical_along_u0(runner, config_file):
    result = runner.invoke(cli, ["critical", str(config_file),
                                 "--set", "sweep.axis=u0", "--set", "sweep.values=-200,-100,-50"])
    assert result.exit_code == 0, result.stderr
    table = _table(result.stdout)
    assert list(table["u0"]) == [-200.0, -100.0, -50.0]
    assert table["eta_c"][1] == pytest.approx(65.612, rel=5e-4)


def test_quartic_command(runner, config_file):
    result = runner.invoke(cli, ["quartic", str(config_file)])
    assert result.exit_code == 0, result.stderr
    table = _table(result.stdout)
    assert list(table["eta"]) == [0.0, 10.0, 20.0]
    assert table["lambda1_re"][0] == pytest.approx(np.sqrt(21.0), rel=1e-9)
    assert all(table["max_residual"] < 1e-9)


def test_steady_command_without_pump(runner, config_file):
    result = runner.invoke(cli, ["steady", str(config_file), "--set", "params.eta=0"])
    assert result.exit_code == 0, result.stderr
    table = _table(result.stdout)
    assert abs(table["theta"][0]) < 1e-8
    assert table["mu"][0] == pytest.approx(10.0, rel=1e-8)
    assert bool(table["converged"][0])


def test_steady_non_convergence_still_writes_the_record(runner, config_file):
    result = runner.invoke(cli, ["steady", str(config_file), "--set", "solver.max_iter=5"])
    assert result.exit_code == 3
    table = _table(result.stdout)
    assert len(table) == 1
    assert not bool(table["converged"][0])
    assert table["status"][0] == "max_iter"


def test_output_option_writes_file(runner, config_file, tmp_path):
    target = tmp_path / "critical.csv"
    result = runner.invoke(cli, ["critical", str(config_file), "-o", str(target)])
    assert result.exit_code == 0, result.stderr
    assert result.stdout == ""
    assert _table(target.read_text(encoding="utf-8"))["eta_c"][0] == pytest.approx(65.612, rel=5e-4)


def test_output_reruns_to_the_same_rows(runner, config_file, tmp_path):
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    assert runner.invoke(cli, ["quartic", str(config_file), "-o", str(first)]).exit_code == 0
    assert runner.invoke(cli, ["quartic", str(first), "-o", str(second)]).exit_code == 0

    def rows(path):
        return [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]

    assert rows(first) == rows(second)


def test_malformed_configuration_exit_code(runner, config_file, tmp_path):
    broken = tmp_path / "broken.conf"
    broken.write_text("params.u0 = -100\nmystery.key = 1\n", encoding="utf-8")
    assert runner.invoke(cli, ["critical", str(broken)]).exit_code == 2
    assert runner.invoke(cli, ["critical", str(tmp_path / "missing.conf")]).exit_code == 2
    assert runner.invoke(cli, ["critical", str(config_file), "--set", "params.kappa=-5"]).exit_code == 2


def test_sweep_commands_reject_u0_axis(runner, config_file):
    result = runner.invoke(cli, ["order-sweep", str(config_file), "--set", "sweep.axis=u0"])
    assert result.exit_code == 2


def test_depletion_command_rejects_lossy_cavity(runner, config_file):
    assert runner.invoke(cli, ["depletion", str(config_file)]).exit_code == 3


def test_depletion_command_below_threshold(runner, config_file):
    result = runner.invoke(cli, ["depletion", str(config_file), "--set", "params.u0=-10", "--set", "params.g=0",
                                 "--set", "params.kappa=0", "--set", "sweep.values=0,6,11"])
    assert result.exit_code == 0, result.stderr
    table = _table(result.stdout)
    assert list(table["eta"]) == [0.0, 6.0, 11.0]
    assert table["n_prime"][0] == pytest.approx(0.0, abs=1e-12)
    assert table["n_prime"][2] > table["n_prime"][1] > 0


def test_profile_command_without_pump(runner, config_file):
    result = runner.invoke(cli, ["profile", str(config_file), "--set", "params.eta=0"])
    assert result.exit_code == 0, result.stderr
    table = _table(result.stdout)
    assert list(table.columns) == ["theta", "density", "potential"]
    assert len(table) == 32
    np.testing.assert_allclose(table["density"], 1.0, atol=1e-10)


def test_jsonl_output(runner, config_file):
    result = runner.invoke(cli, ["critical", str(config_file), "--set", "output.format=jsonl"])
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0].startswith('{"meta"')
    assert len(lines) == 2


def test_version_option(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "cavity-selforg" in result.stdout
