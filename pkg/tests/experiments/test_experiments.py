# Copyright 2026 irand development team.

# Permission is hereby granted, free of charge, to any person obtaining a copy of
# this software and associated documentation files (the "Software"), to deal in
# the Software without restriction, including without limitation the rights to use,
# copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED,
# INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE
# FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import json

import pytest

from irand.args.setup import parse_args_experiment
from irand.cli import main
from irand.experiments import EXPERIMENTS
from irand.experiments.base import Verdict, execute

SMALL_RUNS = {
    "asymptotics": [
        "--n_grid", "10", "100",
        "--replicas", "20",
        "--an_grid", "10", "50",
        "--an_replicas", "10",
        "--hoeffding_n", "50",
        "--hoeffding_replicas", "100",
        "--sandwich_n", "50",
        "--sandwich_replicas", "10",
        "--exact_max", "6",
        "--oracle_replicas", "100",
        "--bc_terms", "50",
    ],
    "tail": [
        "--n_grid", "1", "2", "4", "8", "30",
        "--replicas", "500",
        "--conditional_replicas", "100",
        "--dual_samples", "20",
        "--passage_samples", "20",
        "--partition_n", "5",
    ],
    "density": ["--cells", "1024", "--refinement_cells", "64", "128"],
    "correlation": [
        "--cells", "1024",
        "--n_grid", "1", "2", "4", "8", "16", "32",
        "--fit_range", "4", "32",
        "--mc_n_grid", "0", "1", "2",
        "--replicas", "500",
        "--tail_replicas", "200",
    ],
    "limits": ["--n_grid", "64", "--replicas", "200", "--cells", "1024", "--cf_points", "5"],
    "infinite": [
        "--caps", "10", "100",
        "--growth_replicas", "100",
        "--n_grid", "10", "20", "40",
        "--replicas", "200",
        "--burn", "2",
        "--burn_replicas", "100",
    ],
}

EXPECTED_TABLES = {
    "asymptotics": ["cn", "an", "hoeffding", "oracle"],
    "tail": ["tail_iterate", "tail_conditional"],
    "density": ["density", "refinement"],
    "correlation": ["correlation", "correlation_mc", "stationary_tail"],
    "limits": ["quantiles_n64", "limits"],
    "infinite": ["growth", "correlation_ff", "correlation_fg"],
}


def small_args(name, out, *extra):
    argv = [name, *SMALL_RUNS[name], "--out", str(out), "--workers", "0", "--no_progress", *extra]
    return parse_args_experiment(argv)


def test_registry():
    assert sorted(EXPERIMENTS) == sorted(SMALL_RUNS)
    for name, experiment in EXPERIMENTS.items():
        assert experiment.name == name
        assert {"alpha", "beta", "p1", "n_grid", "replicas"} <= set(experiment.defaults)


@pytest.mark.parametrize("name", sorted(SMALL_RUNS))
def test_small_run(name, tmp_path):
    args = small_args(name, tmp_path)
    verdict = execute(EXPERIMENTS[name], args)

    assert isinstance(verdict, Verdict)
    assert verdict.checks
    run_dir = tmp_path / name
    for table in EXPECTED_TABLES[name]:
        lines = (run_dir / f"{table}.csv").read_text().splitlines()
        assert len(lines) >= 2

    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["args"]["experiment"] == name
    assert manifest["args"]["seed"] == 1

    written = json.loads((run_dir / "verdict.json").read_text())
    assert written["experiment"] == name
    assert written["passed"] == verdict.passed
    assert [c["name"] for c in written["checks"]] == [c.name for c in verdict.checks]
    if name != "limits":
        assert any(p.suffix == ".gp" for p in run_dir.iterdir())


def test_density_small_run_passes(tmp_path):
    verdict = execute(EXPERIMENTS["density"], small_args("density", tmp_path))
    checks = {c.name: c for c in verdict.checks}
    assert checks["residual"].passed
    assert checks["normalization"].passed


def test_tail_structural_checks_pass(tmp_path):
    verdict = execute(EXPERIMENTS["tail"], small_args("tail", tmp_path))
    checks = {c.name: c for c in verdict.checks}
    assert checks["dual_mismatches"].value == 0
    assert checks["passage_violations"].value == 0
    assert checks["partition_residual"].passed


def test_correlation_gates_monte_carlo(tmp_path):
    verdict = execute(EXPERIMENTS["correlation"], small_args("correlation", tmp_path))
    check = {c.name: c for c in verdict.checks}["mc_agreement_sigmas"]
    assert check.threshold == 4.0
    assert check.passed == (check.value <= 4.0)

    lenient = small_args("correlation", tmp_path, "--name", "lenient", "--tolerances", '{"mc_sigmas": 1e9}')
    verdict = execute(EXPERIMENTS["correlation"], lenient)
    assert {c.name: c for c in verdict.checks}["mc_agreement_sigmas"].passed


def test_rerun_is_byte_identical(tmp_path):
    execute(EXPERIMENTS["asymptotics"], small_args("asymptotics", tmp_path, "--name", "serial"))
    args = small_args("asymptotics", tmp_path, "--name", "parallel")
    args.workers = 2
    execute(EXPERIMENTS["asymptotics"], args)
    execute(EXPERIMENTS["asymptotics"], small_args("asymptotics", tmp_path, "--name", "again"))

    for table in ("cn", "an", "hoeffding", "oracle"):
        serial = (tmp_path / "serial" / f"{table}.csv").read_bytes()
        assert serial == (tmp_path / "parallel" / f"{table}.csv").read_bytes()
        assert serial == (tmp_path / "again" / f"{table}.csv").read_bytes()
    assert (tmp_path / "serial" / "verdict.json").read_bytes() == (tmp_path / "again" / "verdict.json").read_bytes()


def test_seed_changes_results(tmp_path):
    execute(EXPERIMENTS["asymptotics"], small_args("asymptotics", tmp_path, "--name", "one"))
    execute(EXPERIMENTS["asymptotics"], small_args("asymptotics", tmp_path, "--name", "two", "--seed", "2"))
    assert (tmp_path / "one" / "cn.csv").read_bytes() != (tmp_path / "two" / "cn.csv").read_bytes()


def test_failed_run_removes_output(tmp_path, monkeypatch):
    def broken(self, writer):
        writer.write_table("partial", [{"n": 1}])
        raise RuntimeError("boom")

    monkeypatch.setattr(EXPERIMENTS["density"], "run", broken)
    with pytest.raises(RuntimeError, match="boom"):
        execute(EXPERIMENTS["density"], small_args("density", tmp_path))
    assert not (tmp_path / "density").exists()


def test_failed_run_keeps_existing_directory(tmp_path, monkeypatch):
    (tmp_path / "density").mkdir()
    (tmp_path / "density" / "notes.txt").write_text("keep")

    def broken(self, writer):
        raise RuntimeError("boom")

    monkeypatch.setattr(EXPERIMENTS["density"], "run", broken)
    with pytest.raises(RuntimeError):
        execute(EXPERIMENTS["density"], small_args("density", tmp_path))
    assert (tmp_path / "density" / "notes.txt").read_text() == "keep"


def test_cli_verdict_exit_codes(tmp_path, capsys):
    argv = ["density", *SMALL_RUNS["density"], "--out", str(tmp_path), "--workers", "0", "--no_progress"]
    code = main(argv)
    written = json.loads((tmp_path / "density" / "verdict.json").read_text())
    assert code == (0 if written["passed"] else 1)
    assert capsys.readouterr().out.startswith("density: ")

    failing = ["tail", *SMALL_RUNS["tail"], "--out", str(tmp_path), "--workers", "0", "--no_progress"]
    assert main(failing + ["--tolerances", '{"tail_constant": 0}', "--name", "failing"]) == 1
    assert (tmp_path / "failing" / "verdict.json").exists()
