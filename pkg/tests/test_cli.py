import json
import subprocess
import sys

import numpy as np
import pytest

from gbn import cli
from gbn.cli import main, resolve_graph
from gbn.graph import read_graph_csv
from gbn.pattern import SamplingPattern, read_pattern
from gbn.theory import CheckResult


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_theory_check_on_path(capsys):
    code, out, _ = run(["theory-check", "--graph", "p3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert all(line.split()[0] in ("PASS", "INFO") for line in lines)
    assert any("uniqueness-rank" in line for line in lines)


def test_theory_check_json(capsys):
    code, out, _ = run(["theory-check", "--graph", "c6", "--format", "json"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["passed"] is True
    assert {c["name"] for c in obj["checks"]} >= {"parseval-tail", "cut-identity", "volume-bound"}


def test_zero_samples_is_an_input_error(capsys):
    code, _, err = run(["sample", "--graph", "p5", "--method", "vac", "--m", "0"], capsys)
    assert code == 1
    assert "--m" in err


@pytest.mark.parametrize("argv", [
    ["sample", "--graph", "p5", "--method", "dpp", "--m", "2"],
    ["sample", "--graph", "nowhere.csv", "--method", "random", "--m", "2"],
    ["sample", "--graph", "p5", "--method", "chen", "--m", "2"],
    ["sample", "--graph", "sensor:seed=1", "--method", "random", "--m", "2"],
    ["metrics", "wavelength", "--graph", "p5"],
    ["metrics", "ks", "--graph", "p5"],
    ["bogus"],
    [],
])
def test_bad_input_exits_1(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_failed_identity_exits_2(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_theory_checks",
                        lambda *a, **k: [CheckResult("parseval-tail", False, 1, 0.5)])
    code, out, err = run(["theory-check", "--graph", "p4"], capsys)
    assert code == 2
    assert "FAIL parseval-tail" in out


def test_linalg_failure_exits_2(monkeypatch, capsys):
    def boom(L):
        raise np.linalg.LinAlgError("did not converge")
    monkeypatch.setattr(cli, "eigendecompose", boom)
    assert run(["sample", "--graph", "p5", "--method", "chen", "--k", "2", "--m", "3"], capsys)[0] == 2


@pytest.mark.parametrize("method", ["random", "vac", "chen", "anis"])
def test_sample_is_deterministic(method, capsys):
    argv = ["sample", "--graph", "sensor:n=60,seed=3", "--method", method, "--m", "8", "--seed", "5",
            "--k", "4"]
    code, first, _ = run(argv, capsys)
    assert code == 0
    assert run(argv, capsys)[1] == first
    p = SamplingPattern.from_json(first)
    assert p.n == 60 and p.m == 8


def test_sample_csv_format(capsys):
    code, out, _ = run(["sample", "--graph", "p6", "--method", "anis", "--m", "2", "--format", "csv"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "node" and len(lines) == 3


def test_gen_graph_writes_sidecar(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code, _, _ = run(["gen-graph", "--family", "community", "--n", "100", "--seed", "2", "--out", str(out)],
                     capsys)
    assert code == 0
    g = read_graph_csv(out)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["n"] == g.n == 100
    assert meta["generator"]["family"] == "community"
    assert meta["n_edges"] == g.n_edges


def test_shorthands():
    assert resolve_graph("p5").n == 5
    assert resolve_graph("grid3x4").n == 12
    assert resolve_graph("k4").n_edges == 6
    assert resolve_graph("sensor:n=50,seed=1").n == 50
    with pytest.raises(ValueError):
        resolve_graph("sensor:n")


@pytest.fixture
def pattern_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert main(["sample", "--graph", "sensor:n=80,seed=1", "--method", "vac", "--m", "10",
                 "--out", str(path)]) == 0
    capsys.readouterr()
    return path


@pytest.mark.parametrize("kind", ["pair-correlation", "redness", "ks", "lambda-set", "partition", "spectrum"])
def test_metrics_kinds(kind, pattern_file, capsys):
    argv = ["metrics", kind, "--graph", "sensor:n=80,seed=1", "--pattern", str(pattern_file)]
    code, csv_out, _ = run(argv, capsys)
    assert code == 0 and csv_out
    code, json_out, _ = run(argv + ["--format", "json"], capsys)
    assert code == 0
    json.loads(json_out)
    assert run(argv, capsys)[1] == csv_out


def test_metrics_wavelength(capsys):
    code, out, _ = run(["metrics", "wavelength", "--graph", "c10", "--d", "0.2", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["lambda_b"] == pytest.approx(2.0)


def test_metrics_pattern_size_mismatch(pattern_file, capsys):
    code, _, err = run(["metrics", "redness", "--graph", "p5", "--pattern", str(pattern_file)], capsys)
    assert code == 1 and "n=80" in err


def test_reconstruct(tmp_path, pattern_file, capsys):
    from gbn.generators import sensor_graph
    from gbn.graph import laplacian
    from gbn.spectral import eigendecompose, signal_sm1, signal_to_csv
    g = sensor_graph(80, 6, seed=1)
    x = signal_sm1(eigendecompose(laplacian(g)), 5, seed=0)
    sig = tmp_path / "x.csv"
    sig.write_text(signal_to_csv(x))
    code, out, _ = run(["reconstruct", "--graph", "sensor:n=80,seed=1", "--signal", str(sig),
                        "--pattern", str(pattern_file), "--k", "5", "--format", "json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["mse"] < 1e-20
    assert np.allclose(rep["x_rec"], x)


def test_experiment_writes_csv_and_svg(tmp_path, capsys):
    cfg = {
        "graph": {"family": "sensor", "n": 60, "seed": 1},
        "signal_model": {"kind": "sm1", "k": 6},
        "samplers": ["random", "vac"],
        "sampling_rates": [8, 12],
        "trials": 2, "snr_db": 20.0, "seed": 3,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run(["experiment", "--config", str(path), "--out", str(out_a)], capsys)[0] == 0
    assert run(["experiment", "--config", str(path), "--out", str(out_b)], capsys)[0] == 0
    for name in ("results.csv", "mse-curve.svg", "mse-curve.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    man_a = json.loads((out_a / "manifest.json").read_text())
    man_b = json.loads((out_b / "manifest.json").read_text())
    assert man_a["config"].pop("output_dir") == str(out_a)
    man_b["config"].pop("output_dir")
    assert man_a == man_b
    assert (out_a / "mse-curve.svg").read_text().count("<polyline") == 2
    code, stdout, _ = run(["experiment", "--config", str(path), "--seed", "4"], capsys)
    assert code == 0 and stdout != (out_a / "results.csv").read_text()


def test_experiment_bad_config(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"graph": "p5"}))
    code, _, err = run(["experiment", "--config", str(path)], capsys)
    assert code == 1 and "signal_model" in err


def test_module_entry_point(tmp_path):
    out = tmp_path / "p.json"
    res = subprocess.run([sys.executable, "-m", "gbn", "sample", "--graph", "c12", "--method", "vac",
                          "--m", "3", "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert read_pattern(out).m == 3
