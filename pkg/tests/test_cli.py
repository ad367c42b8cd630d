"""End-to-end CLI: exit codes, stdout contract, reproducibility."""

import json
import os
import subprocess
import sys

import pytest

from ce_offload.ce_solver import SolverConfig, config_to_json
from ce_offload.harness import ScenarioSpec, generate_scenario
from ce_offload.model import scenario_to_json


def run_cli(*args, threads="1"):
    env = os.environ.copy()
    env["CE_OFFLOAD_THREADS"] = threads
    return subprocess.run(
        [sys.executable, "-m", "ce_offload.cli", *map(str, args)],
        capture_output=True, env=env,
    )


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    scenario = generate_scenario(ScenarioSpec(n_tasks=3, n_caps=2, seed=21), 0)
    scenario_path = root / "scenario.json"
    scenario_path.write_text(scenario_to_json(scenario), encoding="utf-8")

    config_path = root / "config.json"
    config_path.write_text(
        config_to_json(SolverConfig(samples=20, elites=4, iterations=6, seed=2)),
        encoding="utf-8")

    sweep_path = root / "sweep.json"
    sweep_path.write_text(json.dumps({
        "scenario": {"n_tasks": 3, "n_caps": 2, "trials": 2, "seed": 9},
        "solver": {"samples": 10, "elites": 2, "iterations": 3, "seed": 4},
        "scales": [0.5, 1.0],
        "methods": ["asce", "nomec"],
        "m_values": [1],
        "configs": [{"samples": 10, "elites": 2, "iterations": 3}],
    }), encoding="utf-8")

    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps({"n_tasks": 3, "n_caps": 2, "seed": 77}),
                         encoding="utf-8")
    return dict(root=root, scenario=scenario_path, config=config_path,
                sweep=sweep_path, spec=spec_path, n_tasks=3)


class TestSolve:
    @pytest.mark.parametrize("method", ["asce", "bnb", "exhaustive", "lpr", "nomec", "fullmec"])
    def test_methods_exit_zero_with_contract_output(self, files, method):
        proc = run_cli("solve", "--scenario", files["scenario"],
                       "--config", files["config"], "--method", method)
        assert proc.returncode == 0, proc.stderr
        lines = proc.stdout.decode().strip().split("\n")
        assert [l.split()[0] for l in lines] == ["objective", "latency", "energy", "assignment"]
        objective = float(lines[0].split()[1])
        assert objective > 0
        assignment = lines[3].split()[1:]
        assert len(assignment) == files["n_tasks"]
        assert all(p in "012" for p in assignment)

    def test_trace_written_for_asce(self, files, tmp_path):
        trace = tmp_path / "trace.csv"
        proc = run_cli("solve", "--scenario", files["scenario"],
                       "--config", files["config"], "--method", "asce",
                       "--trace", trace)
        assert proc.returncode == 0
        text = trace.read_text(encoding="utf-8")
        assert text.startswith("iter,batch_min,batch_mean,incumbent_best\n")

    def test_config_optional_for_baselines(self, files):
        proc = run_cli("solve", "--scenario", files["scenario"], "--method", "nomec")
        assert proc.returncode == 0

    def test_malformed_scenario_names_key(self, files, tmp_path):
        doc = json.loads(files["scenario"].read_text(encoding="utf-8"))
        del doc["tasks"][0]["alpha_bits"]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc), encoding="utf-8")
        proc = run_cli("solve", "--scenario", bad, "--method", "nomec")
        assert proc.returncode == 2
        assert b"alpha_bits" in proc.stderr

    def test_exhaustive_above_cap(self, files, tmp_path):
        big = generate_scenario(ScenarioSpec(n_tasks=24, n_caps=1, seed=5), 0)
        path = tmp_path / "big.json"
        path.write_text(scenario_to_json(big), encoding="utf-8")
        proc = run_cli("solve", "--scenario", path, "--method", "exhaustive")
        assert proc.returncode == 2
        assert b"cap" in proc.stderr

    def test_missing_file(self):
        proc = run_cli("solve", "--scenario", "/nonexistent.json", "--method", "nomec")
        assert proc.returncode == 2

    def test_seed_override_changes_result_stream(self, files):
        a = run_cli("solve", "--scenario", files["scenario"],
                    "--config", files["config"], "--method", "asce", "--seed", "1")
        b = run_cli("solve", "--scenario", files["scenario"],
                    "--config", files["config"], "--method", "asce", "--seed", "1")
        assert a.stdout == b.stdout

    def test_stdout_deterministic(self, files):
        runs = [run_cli("solve", "--scenario", files["scenario"],
                        "--config", files["config"], "--method", "asce")
                for _ in range(2)]
        assert runs[0].stdout == runs[1].stdout
        assert runs[0].returncode == runs[1].returncode == 0


class TestSweep:
    @pytest.mark.parametrize("kind", ["convergence", "size", "lambda"])
    def test_kinds_write_csv_and_png(self, files, tmp_path, kind):
        out = tmp_path / kind
        proc = run_cli("sweep", "--spec", files["sweep"], "--kind", kind,
                       "--out", out, "--tag", "t0")
        assert proc.returncode == 0, proc.stderr
        csv_path = out / f"{kind}_t0.csv"
        png_path = out / f"{kind}_t0.png"
        assert csv_path.exists() and png_path.exists()
        assert png_path.read_bytes().startswith(b"\x89PNG")
        listed = proc.stdout.decode().strip().split("\n")
        assert str(csv_path) in listed and str(png_path) in listed

    def test_no_plot_skips_png(self, files, tmp_path):
        out = tmp_path / "noplot"
        proc = run_cli("sweep", "--spec", files["sweep"], "--kind", "size",
                       "--out", out, "--tag", "t1", "--no-plot")
        assert proc.returncode == 0
        assert (out / "size_t1.csv").exists()
        assert not (out / "size_t1.png").exists()

    def test_byte_identical_reruns(self, files, tmp_path):
        out = tmp_path / "repro"
        first = run_cli("sweep", "--spec", files["sweep"], "--kind", "size",
                        "--out", out, "--tag", "x")
        csv_bytes = (out / "size_x.csv").read_bytes()
        png_bytes = (out / "size_x.png").read_bytes()
        second = run_cli("sweep", "--spec", files["sweep"], "--kind", "size",
                         "--out", out, "--tag", "x")
        assert first.returncode == second.returncode == 0
        assert first.stdout == second.stdout
        assert (out / "size_x.csv").read_bytes() == csv_bytes
        assert (out / "size_x.png").read_bytes() == png_bytes

    def test_bad_spec_exits_two(self, files, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"scenario": {"n_tasks": 0}}), encoding="utf-8")
        proc = run_cli("sweep", "--spec", bad, "--kind", "size", "--out", tmp_path)
        assert proc.returncode == 2

    def test_unwritable_out_exits_one(self, files, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("file, not dir", encoding="utf-8")
        proc = run_cli("sweep", "--spec", files["sweep"], "--kind", "size",
                       "--out", blocker, "--tag", "t")
        assert proc.returncode == 1


class TestCompare:
    def test_table_and_outputs(self, files, tmp_path):
        out = tmp_path / "cmp"
        proc = run_cli("compare", "--spec", files["sweep"], "--out", out, "--tag", "c0")
        assert proc.returncode == 0, proc.stderr
        stdout = proc.stdout.decode()
        assert "method" in stdout and "asce" in stdout and "nomec" in stdout
        assert (out / "compare_c0.csv").exists()
        assert (out / "compare_c0.png").exists()
        # timings are diagnostics, not results
        assert b"wall-time" in proc.stderr
        assert "wall-time" not in stdout
        assert "seconds" not in (out / "compare_c0.csv").read_text(encoding="utf-8")

    def test_reruns_byte_identical(self, files, tmp_path):
        out = tmp_path / "cmp2"
        a = run_cli("compare", "--spec", files["sweep"], "--out", out, "--tag", "c")
        csv_bytes = (out / "compare_c.csv").read_bytes()
        b = run_cli("compare", "--spec", files["sweep"], "--out", out, "--tag", "c")
        assert a.stdout == b.stdout
        assert (out / "compare_c.csv").read_bytes() == csv_bytes

    def test_missing_spec_exits_two(self, tmp_path):
        proc = run_cli("compare", "--spec", tmp_path / "none.json", "--out", tmp_path)
        assert proc.returncode == 2


class TestGenScenario:
    def test_deterministic_and_reference_constants(self, files, tmp_path):
        out1 = tmp_path / "s1.json"
        out2 = tmp_path / "s2.json"
        a = run_cli("gen-scenario", "--spec", files["spec"], "--seed", "123", "--out", out1)
        b = run_cli("gen-scenario", "--spec", files["spec"], "--seed", "123", "--out", out2)
        assert a.returncode == b.returncode == 0
        assert out1.read_bytes() == out2.read_bytes()
        doc = json.loads(out1.read_text(encoding="utf-8"))
        assert doc["processors"][0]["rate_cps"] == 2e8
        assert doc["processors"][1]["rate_cps"] == 2e9
        assert doc["power"] == {"p0_w": 0.8, "pt_w": 1.258, "pr_w": 1.181}

    def test_seed_changes_tasks(self, files, tmp_path):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        run_cli("gen-scenario", "--spec", files["spec"], "--seed", "1", "--out", out1)
        run_cli("gen-scenario", "--spec", files["spec"], "--seed", "2", "--out", out2)
        assert out1.read_bytes() != out2.read_bytes()

    def test_round_trip_through_solve(self, files, tmp_path):
        out = tmp_path / "gen.json"
        run_cli("gen-scenario", "--spec", files["spec"], "--seed", "5", "--out", out)
        proc = run_cli("solve", "--scenario", out, "--method", "bnb")
        assert proc.returncode == 0

    def test_invalid_ranges_exit_two(self, tmp_path):
        bad = tmp_path / "bad_spec.json"
        bad.write_text(json.dumps({"alpha_bits": [5.0, 1.0]}), encoding="utf-8")
        proc = run_cli("gen-scenario", "--spec", bad, "--seed", "1",
                       "--out", tmp_path / "x.json")
        assert proc.returncode == 2


def test_env_threads_validation(files):
    proc = run_cli("sweep", "--spec", files["sweep"], "--kind", "size",
                   "--out", files["root"] / "envcheck", "--tag", "e", threads="-2")
    assert proc.returncode == 2
    assert b"CE_OFFLOAD_THREADS" in proc.stderr
