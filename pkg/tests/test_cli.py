import json
import shutil
import subprocess

import pytest

from redshift.cli import ConfigError, main, make_config, read_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


CP1 = ("--prime", "3", "--group", "Cp^1", "--variant", "tate", "--window", "s=-800..800,n=0..80")


def test_pages_infinity_table(capsys):
    code, out, _ = run(capsys, *CP1, "--page", "inf", "--emit", "table")
    assert code == 0
    assert "t^27" in out or "t^-27" in out


def test_pages_e2_is_clean(capsys):
    code, _, _ = run(capsys, "--prime", "3", "--window", "s=-20..20,n=0..20", "--page", "2")
    assert code == 0


def test_pages_json_round_trips(capsys):
    code, out, _ = run(capsys, *CP1, "--page", "inf", "--emit", "json")
    assert code == 0
    data = json.loads(out)
    assert data


def test_deterministic_output(capsys):
    a = run(capsys, *CP1, "--page", "inf", "--emit", "json")
    b = run(capsys, *CP1, "--page", "inf", "--emit", "json")
    assert a == b


def test_tc_p7(capsys):
    code, out, _ = run(capsys, "--prime", "7", "tc")
    assert code == 0
    assert "# poincare: OK" in out
    rows = [line for line in out.splitlines() if line and not line.startswith(("#", "name", "relation"))]
    assert len(rows) == 88


def test_tc_height_0(capsys):
    code, out, _ = run(capsys, "--prime", "7", "tc", "tc-height-0", "--emit", "json")
    assert code == 0 and len(json.loads(out)["generators"]) == 10


def test_k_padic_shorthand(capsys):
    code, out, _ = run(capsys, "--prime", "7", "k-padic", "--emit", "json")
    gens = json.loads(out)["generators"]
    assert code == 0
    assert sum(g["v3_height"] == "free" for g in gens) == 88
    assert sum(g["v3_height"] == 1 for g in gens) == 3


def test_tc_poincare_emit(capsys):
    code, out, _ = run(capsys, "--prime", "3", "tc", "--emit", "poincare")
    assert code == 0 and out.splitlines()[0] == "1 x^-1"


@pytest.mark.parametrize("argv", [
    ("--prime", "4", "tc"),
    ("--prime", "x", "tc"),
    ("--prime", "3", "--window", "s=1..0,n=0..1"),
    ("--prime", "3", "--variant", "nope"),
    ("--prime", "3", "--group", "Z"),
    ("--prime", "3", "--emit", "xml", "tc"),
    ("--prime", "3", "tc", "bogus"),
    ("verify", "bogus"),
])
def test_configuration_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err and not out


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("REDSHIFT_THREADS", "0")
    code, _, err = run(capsys, "--prime", "3", "--window", "s=-20..20,n=0..20", "--page", "2")
    assert code == 2 and "REDSHIFT_THREADS" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nprime=5\nemit=json\n")
    assert read_config_file(str(cfg)) == {"prime": "5", "emit": "json"}
    code, out, _ = run(capsys, "--config", str(cfg), "tc")
    assert code == 0 and json.loads(out)["prime"] == 5
    code, out, _ = run(capsys, "--config", str(cfg), "--prime", "3", "tc")
    assert json.loads(out)["prime"] == 3


def test_config_file_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    with pytest.raises(ConfigError):
        read_config_file(str(cfg))
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "missing.cfg"))


def test_make_config_defaults():
    cfg = make_config({"prime": "7", "group": "T", "variant": "loc-hfp", "window": "s=-10..0,n=0..5",
                       "page": "inf", "emit": "table", "out": "-"})
    assert cfg.prime == 7 and str(cfg.group) == "T" and not cfg.formal


def test_out_file(tmp_path, capsys):
    path = tmp_path / "tc.json"
    code, out, _ = run(capsys, "--prime", "3", "tc", "--emit", "json", "--out", str(path))
    assert code == 0 and not out
    assert json.loads(path.read_text())["prime"] == 3


def test_verify_filters_by_prime(capsys):
    code, out, _ = run(capsys, "--prime", "11", "verify", "quick")
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines() if line.startswith(("PASS", "FAIL")))


@pytest.mark.skipif(shutil.which("redshift") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["redshift", "--prime", "7", "tc", "tc-height-1", "--emit", "json"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and len(json.loads(res.stdout)["generators"]) == 32
