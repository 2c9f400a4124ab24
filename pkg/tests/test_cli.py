import csv
import json

import numpy as np
import pytest

from qpronto import Termination
from qpronto.cli import EXIT_CODES, ITERATION_COLUMNS, main, run, trajectory_columns
from qpronto.config import (
    ConfigError,
    describe,
    load_config,
    load_preset,
    parse_config,
    preset_names,
    preset_text,
)


def small_raw(**changes):
    raw = json.loads(preset_text("qubit_pi_pulse"))
    raw["name"] = "small"
    raw["grid"] = 200
    raw.update(changes)
    return raw


def write_config(tmp_path, raw, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw, indent=2))
    return path


def test_preset_matches_benchmark_setup():
    assert "qubit_pi_pulse" in preset_names()
    cfg = load_preset("qubit_pi_pulse")
    sc = cfg.solver_config()
    assert (cfg.n, cfg.m, cfg.horizon, cfg.grid_steps) == (2, 1, 5.0, 5000)
    assert (sc.tol, sc.alpha, sc.beta, sc.delta) == (1e-2, 0.4, 0.7, 0.6)
    u0 = cfg.initial_guess().values[:, 0]
    assert u0.max() == pytest.approx(0.2) and abs(u0[0]) < 1e-15
    R = cfg.cost().R_on(cfg.grid)[:, 0, 0]
    assert R.min() == pytest.approx(1.0) and R[0] == pytest.approx(1e6 + 1)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_preset("nope")


@pytest.mark.parametrize(
    "changes, field",
    [
        (dict(schema_version=2), "schema_version"),
        (dict(drift={"re": [[0, 1], [0, 0]]}), "drift"),
        (dict(initial_state={"re": [1.0, 1.0]}), "initial_state"),
        (dict(grid=201), "grid"),
        (dict(horizon=-1.0), "horizon"),
        (dict(input_weight={"kind": "constant", "value": 0.0}), "input_weight.value"),
        (dict(solver={"gamma": 1.0}), "solver.gamma"),
        (dict(solver={"alpha": 0.9}), "solver"),
        (dict(controls=[]), "controls"),
    ],
)
def test_invalid_configs(changes, field):
    with pytest.raises(ConfigError) as info:
        parse_config(small_raw(**changes))
    assert info.value.field == field


def test_missing_schema_version():
    raw = small_raw()
    del raw["schema_version"]
    with pytest.raises(ConfigError, match="schema"):
        parse_config(raw)


def test_error_carries_line_number(tmp_path):
    path = write_config(tmp_path, small_raw(drift={"re": [[0, 1], [0, 0]]}))
    with pytest.raises(ConfigError) as info:
        load_config(path)
    text = path.read_text().splitlines()
    assert '"drift"' in text[info.value.line - 1]


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "schema_version": 1,\n  oops\n}')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line == 3


def test_tabulated_and_polynomial_inputs():
    raw = small_raw(
        input_weight={"kind": "tabulated", "samples": [[0, 2.0], [5, 1.0]]},
        initial_guess={"kind": "tabulated", "samples": [[0, 0.0], [5, 0.5]]},
    )
    raw["controls"][0]["coupling"] = {"kind": "polynomial", "coefficients": [0, 1, 0, 0.1]}
    cfg = parse_config(raw)
    assert cfg.cost().R(2.5)[0, 0] == pytest.approx(1.5)
    assert cfg.initial_guess().values[-1, 0] == pytest.approx(0.5)
    assert "tabulated (2 samples)" in describe(cfg)


def test_describe_output(capsys):
    assert main(["--preset", "qubit_pi_pulse", "--describe"]) == 0
    out = capsys.readouterr().out
    assert "n=2" in out and "N=5000" in out and "dt=0.001" in out


def test_trajectory_columns():
    assert trajectory_columns(2, 1) == ["t", "u1", "P0", "P1", "re0", "re1", "im0", "im1"]


def test_every_termination_has_an_exit_code():
    assert set(EXIT_CODES) == set(Termination)
    assert len(set(EXIT_CODES.values()) | {4}) == len(EXIT_CODES) + 1


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    path = write_config(tmp, small_raw())
    code = main(["--config", str(path), "--out", str(tmp / "a"), "--quiet"])
    return tmp, path, code


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_outputs(cli_run):
    tmp, _, code = cli_run
    out = tmp / "a"
    assert code == 0
    its = read_csv(out / "iterations.csv")
    assert its[0] == ITERATION_COLUMNS
    costs = [float(r[1]) for r in its[1:]]
    assert all(b < a for a, b in zip(costs, costs[1:]))
    traj = read_csv(out / "trajectory.csv")
    assert traj[0] == trajectory_columns(2, 1)
    assert len(traj) == 202
    rows = np.array(traj[1:], dtype=float)
    np.testing.assert_allclose(rows[:, 2] + rows[:, 3], 1.0, atol=1e-8)
    np.testing.assert_allclose(rows[:, 2], rows[:, 4] ** 2 + rows[:, 6] ** 2, atol=1e-14)
    report = json.loads((out / "report.json").read_text())
    assert report["termination"] == "converged" and report["converged"]
    assert report["iterations"] == len(its) - 1
    assert report["final_infidelity"] == pytest.approx(1 - rows[-1, 3])
    effective = json.loads((out / "effective_config.json").read_text())
    assert parse_config(effective).grid_steps == 200
    assert not list(out.glob(".*"))


def test_runs_are_byte_identical(cli_run):
    tmp, path, _ = cli_run
    main(["--config", str(path), "--out", str(tmp / "b"), "--quiet"])
    for name in ("iterations.csv", "trajectory.csv", "effective_config.json"):
        assert (tmp / "a" / name).read_bytes() == (tmp / "b" / name).read_bytes()


def test_overrides_and_budget_exit_code(tmp_path):
    raw = small_raw(solver={"max_iters": 1})
    path = write_config(tmp_path, raw)
    code = main(["--config", str(path), "--out", str(tmp_path / "o"), "--tol", "1e-12", "--grid", "100", "--quiet"])
    assert code == EXIT_CODES[Termination.MAX_ITERS]
    effective = json.loads((tmp_path / "o" / "effective_config.json").read_text())
    assert effective["grid"] == 100 and effective["solver"]["tol"] == 1e-12


def test_config_error_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, small_raw(initial_state={"re": [1.0, 1.0]}))
    assert main(["--config", str(path), "--out", str(tmp_path / "o")]) == 4
    assert "initial_state" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_out_required(capsys):
    assert main(["--preset", "qubit_pi_pulse"]) == 4


def test_run_api(tmp_path):
    cfg = parse_config(small_raw(grid=100))
    outputs = run(cfg, tmp_path)
    assert outputs.exit_code == 0 and outputs.report.exists()
