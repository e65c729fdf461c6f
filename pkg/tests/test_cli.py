import json
import subprocess
import sys

import pytest

from pqkanto.cli import main
from pqkanto.manifest import RunManifest


def run_cli(args, cwd, capsys=None):
    """Invoke the CLI in-process from a working directory."""
    import os

    old = os.getcwd()
    os.chdir(cwd)
    try:
        return main(args)
    finally:
        os.chdir(old)


class TestEval:
    def test_mass_example(self, tmp_path, capsys):
        code = run_cli(
            ["eval", "--fn", "const1", "--x", "0.3", "--n", "5", "--m", "1",
             "--alpha", "0", "--beta", "0", "--bn", "1", "--p", "0.9",
             "--q", "0.8", "--mode", "normalized"],
            tmp_path,
        )
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert float(out) == pytest.approx(1.0, abs=1e-12)

    def test_identity_example(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "id", "--x", "1", "--n", "1",
                        "--p", "1", "--q", "1"], tmp_path)
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.75)

    def test_domain_error_exit_2(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "id", "--x", "2", "--bn", "1",
                        "--n", "1"], tmp_path)
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_convergence_error_exit_3(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "sin", "--x", "0.5", "--n", "2",
                        "--p", "1", "--q", "0.9999999"], tmp_path)
        assert code == 3
        assert "convergence" in capsys.readouterr().err

    def test_unknown_function_exit_2(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "mystery", "--x", "0.1", "--n", "2"],
                       tmp_path)
        assert code == 2

    def test_unit_and_extended_variants(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "square", "--x", "7", "--n", "3",
                        "--bn", "2", "--op", "extended"], tmp_path)
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(49.0)
        code = run_cli(["eval", "--fn", "id", "--x", "0", "--n", "2",
                        "--p", "1", "--q", "1", "--op", "unit"], tmp_path)
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(1 / 6)

    def test_json_output_with_manifest(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "id", "--x", "0.5", "--n", "4",
                        "--p", "0.9", "--q", "0.8", "--json", "value.json"],
                       tmp_path)
        assert code == 0
        data = json.loads((tmp_path / "value.json").read_text())
        assert data["command"] == "eval"
        manifest = RunManifest.load(tmp_path / "value.json.manifest.json")
        assert manifest.command == "eval"
        assert manifest.outputs == ["value.json"]


class TestVerify:
    def test_float_report(self, tmp_path, capsys):
        code = run_cli(["verify", "--x", "0.5", "--n", "3", "--p", "1",
                        "--q", "1", "--out", "rep.json"], tmp_path)
        assert code == 0
        data = json.loads((tmp_path / "rep.json").read_text())
        for key in ("m0", "m1", "m2", "c1", "c2"):
            assert abs(data["residuals_float"][key]) <= 1e-12

    def test_exact_report_residuals_recorded(self, tmp_path):
        code = run_cli(["verify", "--x", "1/2", "--n", "2", "--p", "9/10",
                        "--q", "4/5", "--mode", "literal", "--exact",
                        "--out", "rep.json"], tmp_path)
        assert code == 0
        data = json.loads((tmp_path / "rep.json").read_text())
        assert data["residuals"]["m0"] == "3/40"
        assert data["residual_is_zero"]["m0"] is False

    def test_exact_size_cap_exit_2(self, tmp_path, capsys):
        code = run_cli(["verify", "--x", "0", "--n", "10", "--m", "3",
                        "--exact"], tmp_path)
        assert code == 2
        assert "n+m" in capsys.readouterr().err

    def test_nonzero_residuals_still_exit_0(self, tmp_path):
        code = run_cli(["verify", "--x", "0.5", "--n", "2", "--p", "0.9",
                        "--q", "0.8", "--out", "rep.json"], tmp_path)
        assert code == 0
        data = json.loads((tmp_path / "rep.json").read_text())
        assert abs(data["residuals_float"]["m1"]) > 1e-3


class TestBounds:
    def test_csv_columns_and_holds(self, tmp_path):
        code = run_cli(["bounds", "--fn", "absdev:5", "--n", "4", "--m", "1",
                        "--p", "0.95", "--q", "0.9", "--bn", "10",
                        "--grid", "7", "--out", "b.csv"], tmp_path)
        assert code == 0
        lines = (tmp_path / "b.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header[0] == "x" and "holds_modulus" in header
        holds_col = header.index("holds_modulus")
        assert all(row.split(",")[holds_col] == "true" for row in lines[1:])

    def test_constant_observed_zero(self, tmp_path):
        code = run_cli(["bounds", "--fn", "const1", "--n", "3", "--p", "0.9",
                        "--q", "0.8", "--grid", "5", "--out", "c.csv"], tmp_path)
        assert code == 0
        lines = (tmp_path / "c.csv").read_text().splitlines()
        obs_col = lines[0].split(",").index("observed_error")
        assert all(abs(float(r.split(",")[obs_col])) <= 1e-12 for r in lines[1:])

    def test_lip_bound_column_populated(self, tmp_path):
        code = run_cli(["bounds", "--fn", "lip:2:0.5", "--n", "5", "--p", "0.9",
                        "--q", "0.8", "--bn", "4", "--grid", "5",
                        "--out", "l.csv"], tmp_path)
        assert code == 0
        lines = (tmp_path / "l.csv").read_text().splitlines()
        col = lines[0].split(",").index("lipschitz_bound")
        assert all(float(r.split(",")[col]) > 0 for r in lines[1:])


class TestConverge:
    def test_sweep_csv_and_decay(self, tmp_path):
        code = run_cli(["converge", "--n-list", "10,50", "--out", "s.csv"],
                       tmp_path)
        assert code == 0
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "n,p_n,q_n,b_n,err_e0,err_e1,err_e2"
        first = lines[1].split(",")
        last = lines[-1].split(",")
        assert float(last[5]) < float(first[5])

    def test_check_only(self, tmp_path):
        code = run_cli(["converge", "--check-only", "--n-list", "10,50",
                        "--out", "hc.json"], tmp_path)
        assert code == 0
        data = json.loads((tmp_path / "hc.json").read_text())
        assert data["all_valid"] is True

    def test_seq_file_tables(self, tmp_path):
        seq = {"n_list": [3, 5], "p": [0.9, 0.95], "q": [0.8, 0.9],
               "b": [1.0, 1.2]}
        (tmp_path / "seq.json").write_text(json.dumps(seq))
        code = run_cli(["converge", "--seq-file", "seq.json", "--out", "t.csv"],
                       tmp_path)
        assert code == 0
        assert (tmp_path / "t.csv").exists()

    def test_seq_file_invalid_row_exit_2(self, tmp_path, capsys):
        seq = {"n_list": [3, 5], "p": [0.9, 0.95], "q": [0.95, 0.9],
               "b": [1.0, 1.2]}
        (tmp_path / "bad.json").write_text(json.dumps(seq))
        code = run_cli(["converge", "--seq-file", "bad.json", "--out", "t.csv"],
                       tmp_path)
        assert code == 2
        err = capsys.readouterr().err
        assert "n=3" in err

    def test_vanishing_mode(self, tmp_path):
        code = run_cli(["converge", "--vanishing", "bump:2", "--n-list",
                        "10,50", "--out", "v.csv"], tmp_path)
        assert code == 0
        lines = (tmp_path / "v.csv").read_text().splitlines()
        assert lines[0] == "n,p_n,q_n,b_n,err_sup"


class TestReplay:
    def test_converge_replay_byte_identical(self, tmp_path):
        run_dir = tmp_path / "orig"
        run_dir.mkdir()
        assert run_cli(["converge", "--n-list", "10,50", "--out", "s.csv"],
                       run_dir) == 0
        assert run_cli(["replay", str(run_dir / "s.csv.manifest.json"),
                        "--outdir", str(tmp_path / "redo")], tmp_path) == 0
        assert (run_dir / "s.csv").read_bytes() == \
            (tmp_path / "redo" / "s.csv").read_bytes()
        assert (run_dir / "s.csv.manifest.json").read_bytes() == \
            (tmp_path / "redo" / "s.csv.manifest.json").read_bytes()

    def test_verify_replay_byte_identical(self, tmp_path):
        run_dir = tmp_path / "orig"
        run_dir.mkdir()
        assert run_cli(["verify", "--x", "1/2", "--n", "2", "--p", "9/10",
                        "--q", "4/5", "--exact", "--out", "rep.json"],
                       run_dir) == 0
        assert run_cli(["replay", str(run_dir / "rep.json.manifest.json"),
                        "--outdir", str(tmp_path / "redo")], tmp_path) == 0
        assert (run_dir / "rep.json").read_bytes() == \
            (tmp_path / "redo" / "rep.json").read_bytes()


class TestConfig:
    def test_config_mirrors_flags(self, tmp_path, capsys):
        cfg = {"fn": "id", "x": "1", "n": 1, "p": "1", "q": "1"}
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        code = run_cli(["eval", "--config", "cfg.json"], tmp_path)
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.75)

    def test_explicit_flag_overrides_config(self, tmp_path, capsys):
        cfg = {"fn": "id", "x": "1", "n": 1, "p": "1", "q": "1"}
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        code = run_cli(["eval", "--config", "cfg.json", "--x", "0"], tmp_path)
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.25)

    def test_unknown_config_key_exit_2(self, tmp_path, capsys):
        (tmp_path / "cfg.json").write_text(json.dumps({"fn": "id", "nope": 1}))
        code = run_cli(["eval", "--config", "cfg.json"], tmp_path)
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_missing_required_flag_exit_2(self, tmp_path, capsys):
        code = run_cli(["eval", "--fn", "id", "--x", "0.5"], tmp_path)
        assert code == 2
        assert "--n" in capsys.readouterr().err


def test_console_script_installed(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "pqkanto.cli", "eval", "--fn", "id", "--x", "1",
         "--n", "1", "--p", "1", "--q", "1"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(0.75)
