import subprocess
import sys

from subspace_bo.cli import main


def test_bench_info(capsys):
    assert main(["bench-info"]) == 0
    out = capsys.readouterr().out
    for fam in ("ackley", "levy", "hyper_ellipsoid", "camelback_augmented"):
        assert fam in out
    assert "1.031628453" in out


def test_bounds_command(tmp_path):
    out = tmp_path / "curve.csv"
    code = main(["bounds", "--D", "20", "--d", "5", "--alpha", "14", "--T", "10",
                 "--kernel", "se", "--out", str(out)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 11


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["run"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["run", "--config", str(tmp_path / "nope.toml")]) == 2
    assert main(["bounds", "--D", "5", "--d", "5", "--T", "3", "--out", str(tmp_path / "x")]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("horizon = 2\nbogus = 1\n[benchmark]\nfamily='levy'\ndim=3\n"
                   "[[optimizers]]\nkind='random'\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_run_command(tmp_path):
    cfg = tmp_path / "ok.toml"
    cfg.write_text("horizon = 2\ninit_points = 2\n[benchmark]\nfamily='levy'\ndim=3\n"
                   "[[optimizers]]\nkind='random'\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "res")]) == 0
    assert (tmp_path / "res" / "summary.csv").exists()
    assert main(["run", "--config", str(cfg), "--workers", "0"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "subspace_bo", "validate"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "FAIL" not in res.stdout
