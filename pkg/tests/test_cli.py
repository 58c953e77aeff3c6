import subprocess
import sys

import pytest

from qbdrive.cli import EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main
import qbdrive.cli as cli

FAST = ["--t-max", "2", "--dt", "0.01"]


def test_run_writes_artifacts(tmp_path, capsys):
    csv, svg = tmp_path / "r.csv", tmp_path / "r.svg"
    code = main(["run", *FAST, "--perturbation", "s3", "--out-csv", str(csv), "--out-svg", str(svg)])
    assert code == EXIT_OK
    assert "perturbation=s3" in capsys.readouterr().out
    assert csv.read_text().startswith("# N=3 h0=1.0")
    assert svg.read_text().startswith("<?xml")


def test_run_with_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("t_max = 1\ndt = 0.01\nperturbation = l8\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_OK
    assert "perturbation=l8" in capsys.readouterr().out


def test_invalid_input_exit_code(capsys):
    assert main(["run", "--dt", "-1"]) == EXIT_INPUT
    assert "dt must be positive" in capsys.readouterr().err
    assert main(["sweep", *FAST, "--perturbations", "l9"]) == EXIT_INPUT


def test_argparse_rejects_unknown_choice():
    with pytest.raises(SystemExit) as info:
        main(["run", "--perturbation", "l9"])
    assert info.value.code == 2


def test_sweep(tmp_path, capsys):
    assert main(["sweep", *FAST, "--out-dir", str(tmp_path), "--workers", "2"]) == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [f"spin1_{p}.{e}" for p in ("l4", "l5", "l8", "s3") for e in ("csv", "svg")]
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_verify_exit_codes(monkeypatch, capsys):
    assert main(["verify", "algebra"]) == EXIT_OK
    assert capsys.readouterr().out.count("[PASS]") == 3
    monkeypatch.setitem(cli.SUITES, "algebra", [("always fails", lambda: (False, "forced"))])
    assert main(["verify", "algebra"]) == EXIT_VERIFY
    assert "[FAIL]" in capsys.readouterr().out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qbdrive", "verify", "algebra"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
