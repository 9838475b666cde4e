import io
import json

import pandas as pd
import pytest

from controllers.ConfigController import config_controller
from controllers.OutputController import output_controller
from controllers.SweepController import SweepController
from schemas.recordSchema import SweepRecord


@pytest.fixture
def config(config_file):
    return config_controller.load(config_file)


def _data_lines(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_csv_header_and_comment_lines(config):
    rows = [SweepRecord(eta=20.0, theta=0.5, converged=True), SweepRecord(eta=10.0, theta=0.0, converged=True)]
    text = output_controller.render(output_controller.to_frame(rows, "eta"), config, "order-sweep")
    lines = text.splitlines()
    assert lines[0].startswith("# cavity-selforg version=")
    assert lines[0].endswith("command=order-sweep")
    assert "omega_R" in lines[1]
    assert "\r" not in text
    data = _data_lines(text)
    assert data[0].split(",")[:3] == ["eta", "u0", "theta"]
    assert data[1].startswith("10,")
    assert data[2].startswith("20,")


def test_twelve_significant_digits(config):
    text = output_controller.render(output_controller.to_frame([{"eta": 1.0 / 3.0}]), config, "critical")
    assert _data_lines(text)[1] == "0.333333333333"


def test_sort_is_stable_and_keeps_extra_columns(config):
    rows = [
        SweepRecord(eta=1.0, converged=True, nu_1=3.0),
        SweepRecord(eta=0.0, converged=False, status="error:DomainError: x", nu_1=float("nan")),
        SweepRecord(eta=1.0, converged=True, nu_1=4.0),
    ]
    frame = output_controller.to_frame(rows, "eta")
    assert list(frame["eta"]) == [0.0, 1.0, 1.0]
    assert list(frame["nu_1"])[1:] == [3.0, 4.0]
    table = pd.read_csv(io.StringIO(output_controller.render(frame, config, "spectrum")), comment="#")
    assert list(table.columns)[-1] == "nu_1"
    assert pd.isna(table["nu_1"][0])


def test_jsonl_meta_line_precedes_records(config):
    jsonl = config.model_copy(update={"output": config.output.model_copy(update={"format": "jsonl"})})
    text = output_controller.render(output_controller.to_frame([{"eta": 1.0}, {"eta": 2.0}]), jsonl, "quartic")
    lines = text.splitlines()
    assert json.loads(lines[0])["meta"]["config"]["params.u0"] == "-100.0"
    assert [json.loads(line)["eta"] for line in lines[1:]] == [1.0, 2.0]


def test_identical_input_gives_identical_output(config, tmp_path):
    rows = [SweepRecord(eta=float(k), theta=k / 7.0, converged=True) for k in range(5)]
    first = output_controller.write(rows, config, "order-sweep", path=str(tmp_path / "a.csv"))
    second = output_controller.write(rows, config, "order-sweep", path=str(tmp_path / "b.csv"))
    assert first == second
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.parametrize("workers", [1, 4])
def test_sweep_controller_keeps_input_order(workers):
    controller = SweepController(max_workers=workers)
    assert controller.map(lambda x: x * x, [3, 1, 2, 5]) == [9, 1, 4, 25]
    assert controller.map(lambda x: x, []) == []
