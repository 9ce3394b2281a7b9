import json
import subprocess
import sys

import numpy as np
import pytest

from segregate import cli
from segregate.errors import DomainError
from segregate.output import read_csv

REDUCED = ["--set", "eos.a=3", "--set", "eos.b=0.3333333333333333", "--set", "eos.R=2.6666666666666665"]
SMALL = ["--set", "grid.n=128", "--set", "minimize.plot=false"]


def _run(tmp_path, *args):
    return cli.main([args[0], "--out", str(tmp_path), *args[1:]])


def _load(path):
    return json.loads(path.read_text())


def test_eos_three_rows(tmp_path):
    assert _run(tmp_path, "eos", *REDUCED) == 0
    header, rows = read_csv(tmp_path / "coexistence.csv")
    assert header[:4] == ["T", "V1", "V2", "Pstar"]
    assert len(rows) == 3
    assert all(r[-1] == "coexistence" for r in rows)
    assert (tmp_path / "isotherms.csv").exists() and (tmp_path / "isotherms.svg").exists()


def test_eos_supercritical_row(tmp_path):
    assert _run(tmp_path, "eos", *REDUCED, "--set", "eos.T=0.9,1.1") == 0
    _, rows = read_csv(tmp_path / "coexistence.csv")
    sup = [r for r in rows if float(r[0]) == 1.1][0]
    assert sup[1] == "" and sup[2] == "" and sup[-1] == "supercritical"


def test_missing_key_exit_2(tmp_path, capsys):
    assert _run(tmp_path, "eos", "--set", "eos.b=0.3", "--set", "eos.R=1") == 2
    assert "eos.a" in capsys.readouterr().err


def test_bad_grid_exit_2(tmp_path):
    assert _run(tmp_path, "minimize", "--set", "grid.n=0") == 2
    assert not any(tmp_path.iterdir())


def test_unknown_key_exit_2(tmp_path, capsys):
    assert _run(tmp_path, "minimize", "--set", "grid.size=64") == 2
    assert "grid.size" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reduced units\neos.a = 3\neos.b = 0.3333333333333333\neos.R = 2.6666666666666665\n"
                   "eos.T = 0.9\n")
    out = tmp_path / "o"
    assert cli.main(["eos", "--config", str(cfg), "--out", str(out)]) == 0
    assert _load(out / "eos.json")["config"]["eos.T"] == [0.9]


def test_minimize_eps_sweep_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(d, "minimize", *SMALL) == 0
    files = sorted(a.glob("eps_*/result.json"))
    assert len(files) == 3
    for f in files:
        rec = _load(f)
        assert "count" in rec["census"] and "converged" in rec
        assert rec["config"]["grid.n"] == 128
        assert (b / f.relative_to(a)).read_bytes() == f.read_bytes()


def test_gamma_two_jumps(tmp_path):
    assert _run(tmp_path, "gamma", "--set", "gamma.k=2", "--set", "gamma.continuation=false") == 0
    pat = _load(tmp_path / "gamma.json")["patterns"][0]
    np.testing.assert_allclose(pat["jumps"], [0.25, 0.75], atol=1e-6)


def test_gamma_rejects_constant_kernel(tmp_path):
    assert _run(tmp_path, "gamma", "--set", "kernel.family=constant") == 2


def test_elastic_ratios(tmp_path):
    assert _run(tmp_path, "elastic-check", "--set", "elastic.fields=3") == 0
    lo, hi = _load(tmp_path / "elastic.json")["ratio_range"]
    assert 3.5 <= lo <= hi <= 4.5


def test_exponent_constant_kernel(tmp_path):
    assert _run(tmp_path, "exponent", "--set", "kernel.family=constant") == 0
    rec = _load(tmp_path / "exponent.json")
    assert "mu" in rec and rec["r2"] >= 0.99
    assert (tmp_path / "loglog.svg").exists()


def test_numerical_error_exit_3(tmp_path, monkeypatch):
    def boom(cfg, out, workers=1):
        raise DomainError("log of a negative number")
    monkeypatch.setitem(cli.COMMANDS, "envelope", boom)
    assert _run(tmp_path, "envelope") == 3


def test_workers_validated(tmp_path):
    assert cli.main(["envelope", "--out", str(tmp_path), "--workers", "0"]) == 2


def test_env_overrides_out(tmp_path, monkeypatch):
    target = tmp_path / "env"
    monkeypatch.setenv("SEGREGATE_OUT", str(target))
    assert cli.main(["envelope", "--out", str(tmp_path / "flag"), "--set", "envelope.kT=0.3"]) == 0
    assert (target / "envelope.json").exists()
    assert not (tmp_path / "flag").exists()


@pytest.mark.slow
def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "segregate", "envelope", "--out", str(tmp_path),
                        "--set", "envelope.kT=0.3"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
