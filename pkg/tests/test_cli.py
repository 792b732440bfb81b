import subprocess
import sys

import pytest

from cvmeasure.cli import main


def write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_simulate_to_file(tmp_path, capsys):
    cfg = write(tmp_path, "source.nu = 2\nscheme.kind = traditional\nsweep.param = loss\nsweep.range = 0:0.6:7\n")
    out = tmp_path / "out" / "res.csv"
    assert main(["simulate", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# curve=s scenario=")
    assert len(lines) == 2 + 7
    assert lines[-1].split(",")[7] == "1.244582472"


def test_simulate_to_stdout(tmp_path, capsys):
    cfg = write(tmp_path, "source.nu = 2\nscheme.kind = psa_joint\npsa.g = 5\ndetection.loss = 0.6\n")
    assert main(["simulate", str(cfg)]) == 0
    assert "psa_joint_bhd" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "source.nu = 2\nscheme.kind = bogus\n")
    assert main(["simulate", str(cfg)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.cfg")]) == 2


def test_strict_flag(tmp_path, capsys):
    text = "source.ladder = 0.8, 0.6\nsource.pump = 1\nscheme.kind = multimode_psa_single\npsa.pump = 1\nlo.xi = 1\nlo.zeta = 1\n"
    cfg = write(tmp_path, text)
    with pytest.warns(UserWarning):
        assert main(["simulate", str(cfg)]) == 0
    with pytest.warns(UserWarning):
        assert main(["simulate", str(cfg), "--strict"]) == 3
    ok = write(tmp_path, "source.nu = 2\nscheme.kind = traditional\n", "ok.cfg")
    assert main(["simulate", str(ok), "--strict"]) == 0


def test_figure(tmp_path, capsys):
    assert main(["figure", "loss_single_b", "--out-dir", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "loss_single_b_g2.csv", "loss_single_b_g3.csv", "loss_single_b_g5.csv", "loss_single_b_ref_Is.csv"
    ]
    assert main(["figure", "nope"]) == 2


def test_figure_bytes_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["figure", "ent_vs_gain_a", "--out-dir", str(a)])
    main(["figure", "ent_vs_gain_a", "--out-dir", str(b), "--jobs", "3"])
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_oracle_check_command(capsys):
    assert main(["oracle-check", "--max-strength", "0.4", "--nmax", "25"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert main(["oracle-check", "--nmax", "10"]) == 1


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "cvmeasure.cli", "figure", "nope"], capture_output=True, text=True)
    assert res.returncode == 2
