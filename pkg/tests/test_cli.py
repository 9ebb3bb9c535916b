import json
import subprocess
import sys

import pytest

from symspec.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_families_example(capsys):
    code, out, _ = run_cli(
        ["families", "--n", "5", "--spec", "F:x=1,I=2", "--certify", "--no-timestamp"],
        capsys,
    )
    assert code == 0
    data = json.loads(out)
    assert data["command"] == "families"
    assert data["result"]["size"] == 12
    assert data["result"]["mu_An"] == pytest.approx(0.2)
    assert data["result"]["product_free"] is True


def test_verify_core_exit_zero(capsys):
    code, out, _ = run_cli(
        ["verify", "--n", "5", "--suite", "core", "--no-timestamp"], capsys
    )
    assert code == 0
    data = json.loads(out)
    assert data["result"]["all_passed"] is True
    names = [c["name"] for c in data["result"]["checks"]]
    assert "parseval-identity" in names


def test_spectrum_report_shape(capsys):
    code, out, _ = run_cli(
        ["spectrum", "--n", "4", "--spec", "star:x=1,I=2", "--d", "1", "--no-timestamp"],
        capsys,
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert {"levels", "partitions", "trace", "norm_sq"} <= set(result)
    assert result["levels"][0]["d"] == 0
    assert {"value", "mult"} <= set(result["partitions"][0]["eigs"][0])


def test_decompose_and_global(capsys):
    code, out, _ = run_cli(
        ["decompose", "--n", "4", "--spec", "F:x=1,I=2", "--no-timestamp"], capsys
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert len(result["partitions"]) == 5
    code, out, _ = run_cli(
        ["global", "--n", "5", "--spec", "umv:I=1;J=1", "--ambient", "Sn",
         "--t", "1", "--no-timestamp"],
        capsys,
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["globalness"]["worst_density"] == 1.0
    assert result["bump_search"]["passes"] is True


def test_structure_subcommand(capsys):
    code, out, _ = run_cli(
        ["structure", "--n", "5", "--spec", "F:x=1,I=2", "--delta", "0.3",
         "--no-timestamp"],
        capsys,
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["split"]["exact_reassembly"] is True
    assert len(result["terms"]["terms"]) == 27


def test_linear_subcommand(capsys):
    code, out, _ = run_cli(
        ["linear", "--n", "4", "--spec", "star:x=1,I=1", "--ambient", "Sn",
         "--eps", "0.05", "--no-timestamp"],
        capsys,
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["normalized"]["row_sum_max"] < 1e-10
    assert "level1_ratio" in result
    code, out, _ = run_cli(
        ["linear", "--n", "4", "--triple", "star:x=1,I=2", "star:x=2,I=3",
         "star:x=1,I=3", "--no-timestamp"],
        capsys,
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert "linear_term" in result["triple"]


def test_maxpf_subcommand(capsys):
    code, out, _ = run_cli(
        ["maxpf", "--n", "4", "--mode", "exact", "--no-timestamp"], capsys
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["size"] == 4
    assert result["certificate"]["product_free"] is True


def test_usage_errors(capsys):
    assert main(["nonsense", "--n", "4"]) == 1
    assert main(["families", "--n", "5"]) == 1  # missing --spec
    assert main(["families", "--n", "5", "--spec", "zzz:1"]) == 1
    assert main(["maxpf", "--n", "9", "--mode", "exact"]) == 1


def test_assertion_failure_exit_code(capsys, monkeypatch):
    from symspec import verify as verify_mod

    def fake_suite(suite, seed):
        return {
            "suite": suite,
            "seed": seed,
            "checks": [{"name": "rigged", "suite": suite, "passed": False, "details": {}}],
            "all_passed": False,
        }

    monkeypatch.setattr(verify_mod, "run_suite", fake_suite)
    monkeypatch.setattr("symspec.cli.verify.run_suite", fake_suite)
    code, out, err = run_cli(["verify", "--n", "4", "--suite", "core", "--no-timestamp"], capsys)
    assert code == 2
    assert "rigged" in err


def test_determinism_byte_identical(capsys):
    args = ["verify", "--n", "5", "--suite", "core", "--seed", "0", "--no-timestamp"]
    _, out1, _ = run_cli(args, capsys)
    _, out2, _ = run_cli(args, capsys)
    assert out1 == out2


def test_timestamp_field_toggle(capsys):
    _, out, _ = run_cli(["families", "--n", "4", "--spec", "F:x=1,I=2"], capsys)
    assert "timestamp" in json.loads(out)
    _, out, _ = run_cli(
        ["families", "--n", "4", "--spec", "F:x=1,I=2", "--no-timestamp"], capsys
    )
    assert "timestamp" not in json.loads(out)


def test_csv_output(capsys, tmp_path):
    out_file = tmp_path / "report.csv"
    code, _, _ = run_cli(
        ["verify", "--n", "4", "--suite", "core", "--format", "csv",
         "--out", str(out_file), "--no-timestamp"],
        capsys,
    )
    assert code == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines[0] == "name,suite,passed"
    assert all("True" in ln or "False" in ln for ln in lines[1:])


def test_threads_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("SYMSPEC_THREADS", "3")
    code, out, _ = run_cli(
        ["families", "--n", "4", "--spec", "F:x=1,I=2", "--no-timestamp"], capsys
    )
    assert code == 0
    monkeypatch.setenv("SYMSPEC_THREADS", "0")
    code, _, err = run_cli(
        ["families", "--n", "4", "--spec", "F:x=1,I=2", "--no-timestamp"], capsys
    )
    assert code == 1


def test_structure_cross_triple_and_log_exponent(capsys):
    code, out, _ = run_cli(
        ["structure", "--n", "6", "--spec", "avoid:I=1,2;J=3,4",
         "--spec-b", "star:x=1,I=1,2", "--spec-c", "star:x=1,I=3,4",
         "--log-exponent", "1.0", "--no-timestamp"],
        capsys,
    )
    assert code == 0
    result = json.loads(out)["result"]
    import math

    assert result["params"]["delta"] == pytest.approx(1 / math.log(6))
    assert result["params"]["beta"] != result["params"]["alpha"]


def test_func_file_input(capsys, tmp_path):
    import numpy as np

    from symspec.funcspace import GroupFunction, write_function_file

    rng = np.random.default_rng(3)
    f = GroupFunction(4, np.round(rng.normal(size=24), 4))
    path = tmp_path / "f.func"
    path.write_text(write_function_file(f, "perm"))
    code, out, _ = run_cli(
        ["linear", "--n", "4", "--func-file", str(path), "--no-timestamp"], capsys
    )
    assert code == 0
    assert json.loads(out)["result"]["normalized"]["row_sum_max"] < 1e-10


def test_set_file_input(capsys, tmp_path):
    from symspec.funcspace import SetFamily, write_set_file

    fam = SetFamily(4, [1, 2, 3, 7, 9])
    path = tmp_path / "a.perms"
    path.write_text(write_set_file(fam, "Sn"))
    code, out, _ = run_cli(
        ["global", "--n", "4", "--set-file", str(path), "--t", "1", "--no-timestamp"],
        capsys,
    )
    assert code == 0


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "symspec.cli", "families", "--n", "4",
         "--spec", "F:x=1,I=2", "--no-timestamp"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["size"] == 3
