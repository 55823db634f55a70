import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from lgks_response.cli import main, parse_sweep, ConfigError
from lgks_response.models import QubitScenario, qubit_reference


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_qubit_analytic_sweep(capsys):
    code, out, _ = run(capsys, "qubit", "--task", "sweep", "--sweep", "delta:0:0.5:3")
    assert code == 0
    head, data = table(out)
    assert head == ["delta", "J0", "J1"]
    assert data.shape == (3, 3)
    p = QubitScenario()
    assert data[0, 1] == pytest.approx(qubit_reference("J0", p), rel=1e-15)
    assert "\r" not in out


def test_workers_do_not_change_output(capsys):
    args = ("qubit", "--task", "heat", "--sweep", "Tbar:45:55:3")
    _, one, _ = run(capsys, *args)
    _, two, _ = run(capsys, *args, "--workers", "2")
    assert one == two


def test_equal_temperatures_no_current(capsys):
    code, out, _ = run(capsys, "qubit", "--task", "heat", "--Ta", "50", "--Tb", "50")
    assert code == 0
    _, data = table(out)
    assert np.all(np.abs(data[0, 1:]) < 1e-10)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# qubit run\ntask = sweep\nsweep = delta:0:0.5:2\nTa = 70\n")
    _, a, _ = run(capsys, "qubit", "--config", str(cfg))
    _, b, _ = run(capsys, "qubit", "--config", str(cfg), "--Ta", "60")
    ref = qubit_reference("J0", QubitScenario(Ta=70.0))
    assert table(a)[1][0, 1] == pytest.approx(ref, rel=1e-14)
    assert table(b)[1][0, 1] == pytest.approx(qubit_reference("J0", QubitScenario()), rel=1e-14)


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.csv"
    code, out, _ = run(capsys, "oscillator", "--task", "sweep", "--sweep", "Tbar:5:6:2", "--out", str(path))
    assert code == 0 and out == ""
    head, data = table(path.read_text())
    assert head[0] == "Tbar" and data.shape == (2, 5)


def test_oscillator_response_columns(capsys):
    code, out, _ = run(capsys, "oscillator", "--nmax", "5", "--tmax", "1", "--dt", "0.01")
    assert code == 0
    head, data = table(out)
    assert head == ["tau", "phi11", "phi12", "phi_total", "Phi11", "Phi12"]
    assert len(data) == 101
    assert np.allclose(data[:, 3], data[:, 1] + data[:, 2])


def test_entropy_task(capsys):
    code, out, _ = run(capsys, "qubit", "--task", "entropy", "--tmax", "2")
    assert code == 0
    _, data = table(out)
    assert np.all(data[:, 3] >= -1e-9)


@pytest.mark.parametrize("argv", [
    ("qubit", "--preset", "nope"),
    ("qubit", "--preset", "fig2"),
    ("qubit", "--task", "sweep"),
    ("qubit", "--task", "sweep", "--sweep", "delta:0:1:0"),
    ("qubit", "--task", "sweep", "--sweep", "x:0:1:2"),
    ("qubit", "--dt", "-1"),
    ("qubit", "--Ta", "abc"),
    ("qubit", "--task", "bogus"),
    ("oscillator", "--g", "200"),
    ("qubit", "--config", "/nonexistent/file"),
    ("verify", "--suite", "nope"),
    ("qubit", "--no-such-flag"),
])
def test_configuration_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_numerical_failure_exit(capsys):
    code, _, err = run(capsys, "qubit", "--task", "response")
    assert code == 3
    assert "EigenvalueShiftPresent" in err


def test_parse_sweep():
    var, xs = parse_sweep("g:10:20:3")
    assert var == "g" and np.allclose(xs, [10, 15, 20])
    with pytest.raises(ConfigError):
        parse_sweep("g:10:20")


def test_verify_core(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "core")
    assert code == 0
    assert "[PASS]" in out and "[FAIL]" not in out


def test_entry_point():
    r = subprocess.run([sys.executable, "-m", "lgks_response.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "respond" in r.stdout
