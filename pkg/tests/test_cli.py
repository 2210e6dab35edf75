import csv
import subprocess
import sys
from fractions import Fraction

import pytest

from latcov import verify
from latcov.cli import main, read_config, write_config


def rows(path):
    return list(csv.reader(open(path)))


def test_covar_global_example(tmp_path):
    out = tmp_path / "cg"
    assert main(["covar-global", "--form1", "4/3,4/3,4/3", "--form2", "1,0,1", "--ymax", "100",
                 "--T", "200", "--out", str(out)]) == 0
    r = rows(out / "report.csv")
    assert "empirical" in r[0] and "formula" in r[0]
    assert (out / "config.resolved").exists() and (out / "summary.txt").exists()


def test_densities_example(tmp_path):
    out = tmp_path / "d"
    assert main(["densities", "--p", "5", "--alpha", "1", "--kmax", "3", "--out", str(out)]) == 0
    r = rows(out / "densities.csv")
    assert [x[1] for x in r[1:]] == ["1", "2", "3"]
    assert all((x[4], x[5]) == ("13", "15") for x in r[1:])
    gaps = [abs(Fraction(int(x[2]), int(x[3])) - Fraction(13, 15)) for x in r[1:]]
    assert gaps[-1] < gaps[0]


def test_verify_appendix_example(tmp_path):
    assert main(["verify", "--suite", "appendix", "--out", str(tmp_path / "v")]) == 0
    assert all(x[1] == "1" for x in rows(tmp_path / "v" / "verify.csv")[1:])


def test_verify_failure_exit_2(tmp_path, monkeypatch):
    monkeypatch.setitem(verify.SUITES, "quadform", [("broken", lambda: (False, "forced failure"))])
    assert main(["verify", "--suite", "quadform", "--out", str(tmp_path / "v")]) == 2
    assert "FAIL quadform.broken" in (tmp_path / "v" / "summary.txt").read_text()


def test_verify_crashing_check_counts_as_failure(monkeypatch):
    def boom():
        raise RuntimeError("kaput")
    monkeypatch.setitem(verify.SUITES, "quadform", [("boom", boom)])
    [(name, ok, detail)] = verify.run_suite("quadform")
    assert not ok and "kaput" in detail


@pytest.mark.parametrize("argv", [
    ["spectrum", "--form", "1,2"],
    ["spectrum", "--bogus", "1"],
    ["nosuch"],
    ["appendix-sums", "--kind", "square_case", "--a", "1", "--b", "1", "--N", "1000"],
    ["appendix-sums", "--N", "100000000"],
    ["verify", "--suite", "nosuch"],
    ["densities", "--threads", "0"],
])
def test_usage_errors_exit_1(argv, tmp_path, capsys):
    with_out = argv + ["--out", str(tmp_path / "u")] if argv[0] != "nosuch" else argv
    try:
        code = main(with_out)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_determinism(tmp_path):
    for d in ("a", "b"):
        assert main(["sigma-infinity", "--alpha", "3", "--samples", "1000000", "--seed", "4",
                     "--out", str(tmp_path / d)]) == 0
        assert main(["dio-gap", "--M", "5,10,20", "--out", str(tmp_path / d / "g")]) == 0
    for name in ("sigma_infinity.csv", "g/gaps.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_roundtrip(tmp_path):
    cfg = {"form": "4/3,4/3,4/3", "ymax": "7/2", "out": "x", "plot": "false"}
    write_config(cfg, tmp_path / "c.cfg")
    assert read_config(tmp_path / "c.cfg") == cfg


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("# spectrum run\nform = 4/3, 4/3, 4/3\nymax = 3\n")
    out = tmp_path / "s"
    assert main(["spectrum", "--config", str(conf), "--ymax", "2", "--out", str(out)]) == 0
    resolved = read_config(out / "config.resolved")
    assert resolved["ymax"] == "2" and resolved["form"] == "4/3, 4/3, 4/3"
    # the echoed config reproduces the run
    out2 = tmp_path / "s2"
    conf2 = tmp_path / "again.cfg"
    conf2.write_text((out / "config.resolved").read_text().replace(str(out), str(out2)))
    assert main(["spectrum", "--config", str(conf2)]) == 0
    assert (out / "spectrum.csv").read_bytes() == (out2 / "spectrum.csv").read_bytes()
    y2 = {(r[0], r[1]) for r in rows(out / "spectrum.csv")[1:]}
    assert y2 == {("1", "1"), ("3", "1"), ("4", "1")}


def test_config_unknown_key(tmp_path):
    conf = tmp_path / "bad.cfg"
    conf.write_text("colour = red\n")
    assert main(["spectrum", "--config", str(conf), "--out", str(tmp_path / "o")]) == 1


def test_env_out_override(tmp_path, monkeypatch):
    monkeypatch.setenv("LATCOV_OUT", str(tmp_path / "env"))
    assert main(["constant-c", "--a", "1", "--b", "1"]) == 0
    assert (tmp_path / "env" / "constant_c.csv").exists()
    # an explicit flag still wins
    assert main(["constant-c", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "constant_c.csv").exists()


def test_square_case_constant(tmp_path):
    assert main(["constant-c", "--a", "3", "--b", "1", "--out", str(tmp_path / "c")]) == 0
    assert rows(tmp_path / "c" / "constant_c.csv")[1][0] == "square_constant"


@pytest.mark.parametrize("argv,files", [
    (["spectrum", "--ymax", "4"], ["spectrum.csv", "spectrum.plt"]),
    (["count", "--R", "1,2,3", "--T", "5", "--step", "0.05"], ["count.csv", "samples.csv", "count.plt"]),
    (["covar-window", "--h", "0.1,0.05", "--ymax", "40"], ["f_of_h.csv", "f_of_h.dat", "f_of_h.plt"]),
    (["dio-gap", "--M", "3,6"], ["gaps.csv", "gaps.plt"]),
    (["appendix-sums", "--N", "2000"], ["partial_sums.csv", "partial_sums.plt"]),
    (["sigma-infinity", "--samples", "1000000", "--correct-bias", "true"], ["sigma_infinity.csv"]),
])
def test_every_subcommand_writes_outputs(argv, files, tmp_path):
    out = tmp_path / "o"
    assert main(argv + ["--plot", "--out", str(out)]) == 0
    for f in files + ["summary.txt", "config.resolved"]:
        assert (out / f).exists(), f


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "latcov", "spectrum", "--form", "1,0,1", "--ymax", "2",
                          "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert res.returncode == 0 and "distinct frequencies" in res.stdout
    bad = subprocess.run([sys.executable, "-m", "latcov", "spectrum", "--form", "x"],
                         capture_output=True, text=True, cwd=tmp_path)
    assert bad.returncode == 1 and "form" in bad.stderr


def test_config_for_other_subcommand(tmp_path):
    conf = tmp_path / "c.cfg"
    conf.write_text("subcommand = count\n")
    assert main(["spectrum", "--config", str(conf), "--out", str(tmp_path / "o")]) == 1
