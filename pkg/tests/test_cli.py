import json
import subprocess
import sys

import pytest

from flatbergman.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kernel_example(capsys):
    code, out, _ = run(capsys, "kernel", "--domain", "prod:disc,ball:1", "--point", "0,0")
    assert code == 0
    assert "kappa = 0.101321183642338" in out
    assert "certified" in out


def test_metric_and_curvature(capsys):
    code, out, _ = run(capsys, "metric", "--point", "0,0", "--direction", "1,0")
    assert code == 0 and "B = 1.41421356237309" in out
    code, out, _ = run(capsys, "curvature", "--point", "0,0", "--direction", "1,1")
    assert code == 0 and "H = -0.5" in out
    code, _, err = run(capsys, "metric", "--point", "0,0")
    assert code == 2 and "direction" in err


def test_extremal(capsys):
    code, out, _ = run(capsys, "extremal", "--point", "0,0", "--direction", "1,0")
    assert code == 0
    assert "I0 = 9.86960440108936" in out and "I2 = " in out


def test_counterexample_example(capsys):
    code, out, _ = run(capsys, "counterexample", "--logt", "-100")
    assert code == 0
    assert "d* = 0.1," in out and "d1/d* = 1.4142135623731" in out
    assert "between |u2| = 1.4 and 1.45" in out


def test_negative_value_lists(capsys):
    code, out, _ = run(capsys, "counterexample", "--logt", "-100,-400")
    assert code == 0 and out.count("d1/d* = ") == 2
    code, out, _ = run(capsys, "kernel", "--domain", "disc", "--point", "-0.5")
    assert code == 0 and "kappa = 0.565884242104517" in out


def test_identity_checks(capsys):
    assert run(capsys, "fuchs", "--domain", "egg:2", "--point", "0.2,0.1", "--direction", "1,1", "--tol", "1e-6")[0] == 0
    assert run(capsys, "transform", "--domain", "disc", "--point", "0", "--direction", "1", "--map", "automorphism:0.5")[0] == 0
    assert run(capsys, "fuchs", "--domain", "disc", "--point", "0.3", "--direction", "1", "--tol", "1e-30")[0] == 1


def test_exit_codes(capsys):
    assert run(capsys, "kernel", "--domain", "cube")[0] == 2
    assert run(capsys, "kernel", "--domain", "disc", "--point", "0,0")[0] == 2
    assert run(capsys, "kernel", "--domain", "disc", "--point", "0.9999")[0] == 3
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "kernel", "--truncation", "1")[0] == 2
    assert run(capsys, "sandwich", "--epsilon", "0.5", "--delta", "0", "--logt", "-200")[0] == 2


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"domain": "disc", "point": "0.5"}))
    code, out, _ = run(capsys, "kernel", "--config", str(cfg))
    assert code == 0 and "kappa = 0.565884242104517" in out
    code, out, _ = run(capsys, "kernel", "--config", str(cfg), "--point", "0")
    assert code == 0 and "kappa = 0.318309886183791" in out
    cfg.write_text(json.dumps({"domian": "disc"}))
    assert run(capsys, "kernel", "--config", str(cfg))[0] == 2
    assert run(capsys, "kernel", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_csv_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "sandwich", "--epsilon", "0.5", "--delta", "0.1", "--logt", "-200,-400",
                   "--samples", "500", "--seed", "3", "--jobs", "1", "--out", str(path))[0] == 0
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert b"\r" not in data and data.startswith(b"#")
    header = [line for line in data.decode().splitlines() if not line.startswith("#")][0]
    assert header.startswith("log_t,")


def test_svg_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        assert run(capsys, "counterexample", "--logt", "-100,-400", "--format", "svg", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()
    assert run(capsys, "counterexample", "--logt", "-100", "--format", "svg")[0] == 2


def test_lemma31_and_ratios(tmp_path, capsys):
    code, out, _ = run(capsys, "lemma31", "--stream", '{"kind": "tilted", "c": 1, "Nprime": 6}', "--jobs", "1")
    assert code == 0 and "log_t," in out
    code, out, _ = run(capsys, "ratios", "--quantity", "kernel", "--epsilon", "0.1", "--delta", "0.01",
                       "--logt", "-400,-800", "--truncation", "20", "--jobs", "1")
    assert code == 0 and "certified" in out


def test_verify_twice_is_byte_identical(tmp_path):
    dirs = [tmp_path / "run1", tmp_path / "run2"]
    for d in dirs:
        proc = subprocess.run([sys.executable, "-m", "flatbergman", "verify", "--seed", "0", "--jobs", "1", "--out", str(d)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "9/9 criteria passed" in proc.stdout
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir())
    assert any(n.endswith(".csv") for n in names)
    for n in names:
        assert (dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes()
