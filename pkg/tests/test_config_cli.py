import json
import warnings

import numpy as np
import pytest

import cohobs as ch
from cohobs import experiments
from cohobs.cli import main, timeseries_rows
from cohobs.config import (
    load_config,
    observer_from_json,
    parse_config,
)
from cohobs.errors import ConfigError


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_load_builtin_example(tmp_path):
    path = write_config(tmp_path, experiments.builtin_config("ex1"))
    config = load_config(path)
    assert np.allclose(config.plant.A, np.diag([-0.4, -0.6]))
    assert config.observer.mode == "cmt"
    assert config.simulation.dt == pytest.approx(1e-3)


def test_config_rejects_odd_state_size():
    data = experiments.builtin_config("ex1")
    data["plant"]["n_x"] = 3
    with pytest.raises(ConfigError, match="n_x"):
        parse_config(data)


def test_config_defaults_cross_covariance_to_zero():
    data = experiments.builtin_config("ex1")
    del data["simulation"]["sigma_po0"]
    config = parse_config(data)
    assert np.array_equal(config.simulation.sigma_po0, np.zeros((2, 2)))


def test_config_missing_field_reports_path():
    data = experiments.builtin_config("ex1")
    del data["simulation"]["mu_p0"]
    with pytest.raises(ConfigError, match=r"\$\.simulation\.mu_p0"):
        parse_config(data)


def test_config_dimension_error_reports_path():
    data = experiments.builtin_config("ex1")
    data["plant"]["B"] = [[1.0, 0.0]]
    with pytest.raises(ConfigError, match=r"\$\.plant\.B"):
        parse_config(data)


def test_load_config_parse_error_has_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n "plant": [,]\n}')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(path)


def test_cli_check_passes_for_examples(tmp_path, capsys):
    for name in ("ex1", "ex2", "ex3"):
        path = write_config(tmp_path, experiments.builtin_config(name), f"{name}.json")
        out = tmp_path / f"{name}_check.json"
        assert main(["check", "--config", str(path), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["realizability"]["passed"] is True
        assert doc["detectable"] is True
    capsys.readouterr()


def test_cli_check_fails_on_corrupted_noise_matrix(tmp_path, capsys):
    data = experiments.builtin_config("ex1")
    data["plant"]["B"][0][0] = -1.5
    path = write_config(tmp_path, data)
    out = tmp_path / "check.json"
    assert main(["check", "--config", str(path), "--out", str(out), "--quiet"]) == 2
    doc = json.loads(out.read_text())
    assert doc["realizability"]["passed"] is False
    assert doc["realizability"]["residual_a"] > 0.1
    capsys.readouterr()


def test_cli_rejects_invalid_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["check", "--config", str(path)]) == 3
    assert "error" in capsys.readouterr().err


def test_cli_synthesize_feasible_artifact(tmp_path, capsys):
    path = write_config(tmp_path, experiments.builtin_config("ex1"))
    out = tmp_path / "observer.json"
    assert main(["synthesize", "--config", str(path), "--mode", "cmt",
                 "--out", str(out), "--quiet"]) == 0
    doc = json.loads(out.read_text())
    assert doc["feasible"] is True
    gap = np.array(doc["report"]["sigma_gap"])
    assert np.allclose(gap, np.diag([1.1111, 0.9091]), atol=1e-3)
    # round trip: the stored observer still satisfies the realizability identities
    obs = observer_from_json(doc["observer"])
    plant = load_config(path).plant
    report = ch.observer_realizability(plant, obs)
    assert report.passed and report.residual_a < 1e-8 and report.residual_b < 1e-8
    capsys.readouterr()


def test_cli_synthesize_infeasible_exit_code(tmp_path, capsys):
    data = experiments.builtin_config("ex1")
    data["observer"]["K"] = (3.0 * np.eye(2)).tolist()
    path = write_config(tmp_path, data)
    out = tmp_path / "observer.json"
    assert main(["synthesize", "--config", str(path), "--mode", "cmt",
                 "--out", str(out), "--quiet"]) == 2
    doc = json.loads(out.read_text())
    assert doc["feasible"] is False
    required = np.array(doc["report"]["noise_gram_required"])
    assert np.allclose(required, np.diag([-1.6842, -2.2857]), atol=1e-3)
    capsys.readouterr()


def test_cli_synthesize_mean_tracking_artifact(tmp_path, capsys):
    data = experiments.builtin_config("ex1")
    data["observer"] = {"K": (3.0 * np.eye(2)).tolist(), "mode": "mt", "n_yo": 2}
    path = write_config(tmp_path, data)
    out = tmp_path / "observer.json"
    assert main(["synthesize", "--config", str(path), "--out", str(out), "--quiet"]) == 0
    doc = json.loads(out.read_text())
    assert doc["feasible"] is True and doc["mode"] == "mt"
    obs = observer_from_json(doc["observer"])
    theta = ch.symplectic_form(obs.n_wo)
    assert np.allclose(obs.B_o @ theta @ obs.B_o.T, [[0.0, -2.0], [2.0, 0.0]], atol=1e-10)
    capsys.readouterr()


def test_cli_simulate_deterministic_and_decaying(tmp_path, capsys):
    path = write_config(tmp_path, experiments.builtin_config("ex1"))
    out1 = tmp_path / "run1.csv"
    out2 = tmp_path / "run2.csv"
    assert main(["simulate", "--config", str(path), "--out", str(out1), "--quiet"]) == 0
    assert main(["simulate", "--config", str(path), "--out", str(out2), "--quiet"]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    lines = out1.read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header == ["t", "e_mu_norm", "e_sigma_fro", "nu_minus", "fidelity"]
    rows = [line.split(",") for line in lines[1:]]
    e_sigma = np.array([float(r[2]) for r in rows])
    nu = np.array([float(r[3]) for r in rows])
    assert (np.diff(e_sigma) <= 1e-12).all()  # monotone decay
    assert e_sigma[-1] < 1e-4
    assert nu[-1] < 1.0
    capsys.readouterr()


def test_cli_simulate_rejects_unrealizable_fixed_noise(tmp_path, capsys):
    data = experiments.ex1_mt_config()
    data["observer"]["B_o"] = [[1.0, 0.0], [0.0, 2.0]]  # wrong sign: not realizable
    path = write_config(tmp_path, data)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv"),
                 "--quiet"]) == 3
    capsys.readouterr()


def test_cli_simulate_numerical_failure_exit_code(tmp_path, capsys):
    data = experiments.builtin_config("ex1")
    data["simulation"]["t_final"] = 2000.0
    data["simulation"]["dt"] = 5.0
    path = write_config(tmp_path, data)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv"),
                 "--quiet"]) == 4
    capsys.readouterr()


def test_cli_reproduce_ex1_bundle(tmp_path, capsys):
    out_dir = tmp_path / "ex1"
    assert main(["reproduce", "ex1", "--out-dir", str(out_dir), "--quiet"]) == 0
    expected = [
        "ex1_cmt_config.json",
        "ex1_cmt_observer.json",
        "ex1_cmt_timeseries.csv",
        "ex1_mt_config.json",
        "ex1_mt_observer.json",
        "ex1_mt_timeseries.csv",
        "ex1_cmt_infeasible_gain.json",
    ]
    for name in expected:
        assert (out_dir / name).exists(), name
    infeasible = json.loads((out_dir / "ex1_cmt_infeasible_gain.json").read_text())
    assert infeasible["feasible"] is False

    def final_fidelity(name):
        lines = (out_dir / name).read_text().strip().split("\n")
        header = lines[0].split(",")
        return float(lines[-1].split(",")[header.index("fidelity")])

    assert final_fidelity("ex1_cmt_timeseries.csv") > final_fidelity("ex1_mt_timeseries.csv")
    assert final_fidelity("ex1_cmt_timeseries.csv") > 1.0 - 1e-3
    capsys.readouterr()


def test_cli_reproduce_ex2_bundle(tmp_path, capsys):
    out_dir = tmp_path / "ex2"
    assert main(["reproduce", "ex2", "--out-dir", str(out_dir), "--quiet"]) == 0
    lines = (out_dir / "ex2_timeseries.csv").read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header == ["t", "e_mu_norm", "e_sigma_fro", "nu_minus_plant",
                      "nu_minus_observer", "fidelity"]
    last = lines[-1].split(",")
    assert last[header.index("fidelity")] == ""  # blank for a two-mode plant
    nu_p = float(last[header.index("nu_minus_plant")])
    nu_o = float(last[header.index("nu_minus_observer")])
    assert abs(nu_p - nu_o) < 1e-3
    capsys.readouterr()


def test_cli_reproduce_ex3_bundle(tmp_path, capsys):
    out_dir = tmp_path / "ex3"
    assert main(["reproduce", "ex3", "--out-dir", str(out_dir), "--quiet"]) == 0
    lines = (out_dir / "ex3_limit_grid.csv").read_text().strip().split("\n")
    assert len(lines) - 1 == len(experiments.ex3_gain_grid())
    assert all("covariance_tracking_possible" not in line for line in lines[1:])
    observer = json.loads((out_dir / "ex3_mt_observer.json").read_text())
    assert observer["feasible"] is True and observer["mode"] == "mt"
    capsys.readouterr()


def test_timeseries_states_are_valid_gaussian_states(ex1_config, ex1_cmt_states,
                                                     ex2_config, ex2_states):
    # No validity warnings on any emitted covariance row of the bundled runs.
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        timeseries_rows(ex1_config.plant, ex1_cmt_states, ex1_config.metrics)
        timeseries_rows(ex2_config.plant, ex2_states, ex2_config.metrics)
        for state in ex1_cmt_states[:: len(ex1_cmt_states) // 10]:
            ch.GaussianState(mu=state.mu_p, sigma=state.sigma_p)
            ch.GaussianState(mu=state.mu_o, sigma=state.sigma_o)
            joint = np.block([[state.sigma_p, state.sigma_po],
                              [state.sigma_po.T, state.sigma_o]])
            ch.GaussianState(mu=np.concatenate([state.mu_p, state.mu_o]), sigma=joint)


def test_observer_json_round_trip_without_noise(ex1_plant):
    from cohobs.config import observer_to_json

    K = (1.0 + np.sqrt(2.0)) * np.eye(2)
    obs = ch.synthesize_mean_tracking(ex1_plant, K)
    assert obs.n_wo == 0
    back = observer_from_json(observer_to_json(obs))
    assert back.B_o.shape == (2, 0)
    assert np.allclose(back.K, obs.K) and np.allclose(back.C_o, obs.C_o)


def test_metric_flags_control_columns(ex1_config, ex1_cmt_states):
    from cohobs.config import MetricsSpec

    only_sigma = MetricsSpec(e_sigma_norm=True, e_mu_norm=False, nu_minus=False, fidelity=False)
    header, rows = timeseries_rows(ex1_config.plant, ex1_cmt_states[:3], only_sigma)
    assert header == ["t", "e_sigma_fro"]
    assert len(rows) == 3 and len(rows[0]) == 2
