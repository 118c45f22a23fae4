"""Command-line surface: output shapes, exit codes, and seed precedence."""

import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from qnumdiff.cli import main

SINE_TOML = (
    '[model]\nkind = "sine"\namplitude = 1.0\nfrequency = 1.0\n'
    '[job]\nmethod = "naive_smooth"\nm = 1\neps = 1e-2\nx = 0.6\n'
    "[run]\ntrials = 3\nseed = 7\n"
)


def load_schema(name):
    return json.loads(resources.files("qnumdiff.schemas").joinpath(name).read_text())


@pytest.fixture()
def sine_config(tmp_path):
    path = tmp_path / "sine.toml"
    path.write_text(SINE_TOML)
    return str(path)


@pytest.fixture(autouse=True)
def _clean_seed_env(monkeypatch):
    monkeypatch.delenv("QNUMDIFF_SEED", raising=False)


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_stencil_json(capsys):
    code, out, _ = run_cli(["stencil", "--m", "1", "--n", "1"], capsys)
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, load_schema("stencil.v1.json"))
    assert payload["coefficients"] == [
        {"j": -1, "numerator": "-1", "denominator": "2"},
        {"j": 0, "numerator": "0", "denominator": "1"},
        {"j": 1, "numerator": "1", "denominator": "2"},
    ]
    assert payload["absSum"] == {"numerator": "1", "denominator": "1"}
    assert payload["nonzeroOffsets"] == [-1, 1]


def test_stencil_csv(capsys):
    code, out, _ = run_cli(["stencil", "--m", "2", "--n", "1", "--format", "csv"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "j,numerator,denominator"
    assert lines[1:] == ["-1,1,1", "0,-2,1", "1,1,1", "D,4,1"]


def test_stencil_rejects_m_over_2n(capsys):
    code, _, err = run_cli(["stencil", "--m", "3", "--n", "1"], capsys)
    assert code == 1
    assert "m <= 2n" in err


def test_schedule_json(capsys):
    code, out, _ = run_cli(
        ["schedule", "--A", "1", "--c", "1", "--sigma", "0", "--m", "1",
         "--eps", "1e-3"], capsys)
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, load_schema("schedule.v1.json"))
    assert payload["mode"] == "threshold"
    assert payload["epsPrime"] == pytest.approx(5e-4)
    assert payload["n"] >= 1
    assert payload["h"] > 0
    assert payload["qubitEstimate"] >= 1


def test_schedule_minimal_mode_uses_fewest_points(capsys):
    _, out_th, _ = run_cli(
        ["schedule", "--A", "1", "--c", "1", "--sigma", "0", "--m", "2",
         "--eps", "1e-3"], capsys)
    _, out_min, _ = run_cli(
        ["schedule", "--A", "1", "--c", "1", "--sigma", "0", "--m", "2",
         "--eps", "1e-3", "--mode", "minimal"], capsys)
    th, mn = json.loads(out_th), json.loads(out_min)
    assert mn["n"] == 1
    assert th["n"] > mn["n"]
    assert mn["h"] < th["h"]
    # Fewer stencil points cost more qubits: the quantization step shrinks.
    assert mn["qubitEstimate"] > th["qubitEstimate"]


def test_schedule_precondition_failure_exits_one(capsys):
    code, _, err = run_cli(
        ["schedule", "--A", "1", "--c", "2", "--sigma", "1", "--m", "3",
         "--eps", "0.45"], capsys)
    assert code == 1
    assert err


def test_estimate_runs_and_validates(sine_config, capsys):
    code, out, _ = run_cli(["estimate", "--config", sine_config], capsys)
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, load_schema("estimate.v1.json"))
    assert payload["label"] == "sine"
    assert payload["seed"] == 7


def test_estimate_seed_precedence(sine_config, capsys, monkeypatch):
    _, base, _ = run_cli(["estimate", "--config", sine_config], capsys)
    monkeypatch.setenv("QNUMDIFF_SEED", "99")
    _, env_out, _ = run_cli(["estimate", "--config", sine_config], capsys)
    assert json.loads(env_out)["seed"] == 99
    assert env_out != base
    # The flag beats the environment and reproduces the config seed.
    _, flag_out, _ = run_cli(
        ["estimate", "--config", sine_config, "--seed", "7"], capsys)
    assert flag_out == base
    monkeypatch.setenv("QNUMDIFF_SEED", "not-a-number")
    code, _, err = run_cli(["estimate", "--config", sine_config], capsys)
    assert code == 1
    assert "QNUMDIFF_SEED" in err


def test_estimate_trials_and_output_overrides(sine_config, tmp_path, capsys):
    out_path = tmp_path / "result.json"
    code, out, _ = run_cli(
        ["estimate", "--config", sine_config, "--trials", "2",
         "--output", str(out_path)], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["trials"] == 2
    assert out_path.read_text() == out


def test_estimate_missing_config_exits_one(capsys):
    code, _, err = run_cli(["estimate", "--config", "/no/such/file.toml"], capsys)
    assert code == 1
    assert err


def test_estimate_invalid_stencil_order_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text(SINE_TOML.replace("m = 1", "m = 3\nn = 1"))
    code, _, err = run_cli(["estimate", "--config", str(path)], capsys)
    assert code == 1
    assert "stencil accuracy" in err


def test_sweep_csv(sine_config, capsys):
    code, out, _ = run_cli(
        ["sweep", "--config", sine_config, "--eps-list", "1e-2,5e-3",
         "--trials", "1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("method,mode,eps,trial,yTilde")
    assert len(lines) == 1 + 3 * 2


def test_sweep_bad_eps_exits_one(sine_config, capsys):
    code, _, err = run_cli(
        ["sweep", "--config", sine_config, "--eps-list", "1e-2,abc"], capsys)
    assert code == 1
    assert err


def test_audit_all_passes(capsys):
    code, out, _ = run_cli(["audit"], capsys)
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, load_schema("audit.v1.json"))
    assert payload["passed"] is True
    assert [r["lemma"] for r in payload["reports"]] == [
        "lemma1", "lemma2", "lemma3", "lemma5", "lemma6"]


def test_audit_single_lemma_with_grid(capsys):
    code, out, _ = run_cli(
        ["audit", "--lemma", "lemma2", "--grid", '{"max_2n": 4}'], capsys)
    assert code == 0
    payload = json.loads(out)
    assert len(payload["reports"]) == 1
    assert payload["reports"][0]["checks"] < 42


def test_audit_empty_grid_exits_one(capsys):
    code, _, err = run_cli(["audit", "--lemma", "lemma1", "--grid", '{"hs": []}'], capsys)
    assert code == 1
    assert "empty grid" in err


def test_audit_malformed_grid_exits_one(capsys):
    code, _, err = run_cli(["audit", "--lemma", "lemma1", "--grid", "{bad"], capsys)
    assert code == 1
    assert "not valid JSON" in err
    code, _, err = run_cli(["audit", "--lemma", "lemma1", "--grid", "[1]"], capsys)
    assert code == 1


def test_table1_csv(sine_config, capsys):
    code, out, _ = run_cli(
        ["table1", "--config", sine_config, "--eps-list",
         "0.0625,0.03125,0.015625,0.0078125"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("row,method,mode,eps")
    rows = [line.split(",") for line in lines[1:]]
    kinds = [row[0] for row in rows]
    assert kinds.count("data") == 12
    assert kinds.count("cell") == 3
    assert kinds.count("recommendation") == 1


def test_usage_errors_exit_one(capsys):
    assert run_cli(["stencil", "--m", "1"], capsys)[0] == 1
    assert run_cli(["no-such-command"], capsys)[0] == 1
    assert run_cli([], capsys)[0] == 1


def test_help_exits_zero(capsys):
    assert run_cli(["--help"], capsys)[0] == 0
    assert run_cli(["stencil", "--help"], capsys)[0] == 0


def test_installed_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qnumdiff.cli", "stencil", "--m", "1", "--n", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["m"] == 1 and payload["n"] == 2
