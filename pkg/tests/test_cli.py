import json
import os
import subprocess
import sys

import numpy as np
import pytest

from tscale.cli import Table, parse_coefficient, parse_complex, run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exp_cayley_example(capsys):
    code, out, _ = _run(capsys, "exp", "--scheme", "cayley", "--alpha", "1", "--scale", "uniform:0:1:3", "--t0", "0")
    assert code == 0
    table = Table.from_csv(out)
    assert table.columns == ["t", "re", "im"]
    assert [r[0] for r in table.rows] == [0, 1, 2, 3]
    assert [r[1] for r in table.rows] == [1, 3, 9, 27]
    assert all(r[2] == 0 for r in table.rows)


def test_exp_zero_alpha_all_ones(capsys):
    code, out, _ = _run(capsys, "exp", "--scheme", "cayley", "--alpha", "0", "--scale", "uniform:0:0.5:6")
    assert code == 0
    assert all(r[1] == 1 and r[2] == 0 for r in Table.from_csv(out).rows)


def test_verify_pythagorean_cayley(capsys):
    code, out, _ = _run(capsys, "verify", "pythagorean", "--family", "cayley")
    assert code == 0
    assert "PASS" in out and "FAIL" not in out
    values = [float(line.split()[-3]) for line in out.splitlines() if line.startswith("pythagorean")]
    assert values and max(values) <= 1e-12


def test_verify_json(capsys):
    code, out, _ = _run(capsys, "--format", "json", "verify", "exact")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert all(r["status"] == "PASS" for r in rows)


def test_complex_literals():
    assert parse_complex("1") == 1
    assert parse_complex("-0.5+2i") == -0.5 + 2j
    assert parse_complex("3i") == 3j
    assert parse_complex("1e-3-4.5i") == 1e-3 - 4.5j
    assert parse_complex("-i") == -1j
    with pytest.raises(ValueError):
        parse_complex("1+2")
    with pytest.raises(ValueError):
        parse_complex("sin(t)")


def test_coefficient_expressions():
    a = parse_coefficient("1+0.5*sin(t)")
    assert a.constant is None
    assert a(0.0) == 1
    b = parse_coefficient("2i*t")
    assert b(1.5) == 3j
    assert parse_coefficient("0.25-1i").constant == 0.25 - 1j
    with pytest.raises(ValueError):
        parse_coefficient("__import__('os')")


def test_usage_errors_exit_2(capsys):
    assert _run(capsys, "exp", "--alpha", "1")[0] == 2
    assert _run(capsys, "exp", "--alpha", "1", "--scale", "bogus:1")[0] == 2
    assert _run(capsys, "exp", "--scheme", "pade:9:9", "--alpha", "1", "--scale", "uniform:0:1:2")[0] == 2
    assert _run(capsys, "nosuch")[0] == 2
    code, _, err = _run(capsys, "verify", "order", "--family", "bp")
    assert code == 2 and "family" in err


def test_domain_errors_exit_1(capsys):
    code, _, err = _run(capsys, "exp", "--scheme", "cayley", "--alpha", "2", "--scale", "uniform:0:1:3")
    assert code == 1
    assert "NotRegressive" in err and "t=0.0" in err
    code, _, err = _run(capsys, "qexp", "--q", "0.5", "--x-grid", "4")
    assert code == 1 and "PoleInProduct" in err
    code, _, err = _run(capsys, "exp", "--alpha", "1", "--scale", "uniform:0:1:3", "--t0", "0.5")
    assert code == 1 and "NotInScale" in err
    code, _, err = _run(capsys, "lieflow", "--group", "so:2", "--A", "[[1,0],[0,1]]", "--scale", "uniform:0:1:2")
    assert code == 1 and "AlgebraViolation" in err


def test_csv_roundtrip_bit_for_bit(capsys):
    code, out, _ = _run(capsys, "trig", "--family", "cayley", "--omega", "0.7+0.1*cos(t)",
                        "--scale", "points:0,0.13,0.4+interval:1:1.5", "--samples", "3")
    assert code == 0
    table = Table.from_csv(out)
    assert table.to_csv() == out
    # values equal the library's own floats
    from tscale.timescale import parse_scale
    from tscale.trigfun import cayley_trig

    ts = parse_scale("points:0,0.13,0.4+interval:1:1.5")
    t, re_c = table.rows[1][0], table.rows[1][1]
    assert re_c == cayley_trig(ts, parse_coefficient("0.7+0.1*cos(t)"), t, 0.0)[0].real


def test_deterministic_output(capsys):
    argv = ["compare", "--field", "pendulum:1", "--schemes", "implicit_midpoint,discrete_gradient,trapezoidal2",
            "--scale", "uniform:0:0.1:20", "--x0", "0.5,0.3"]
    first = _run(capsys, *argv)[1]
    second = _run(capsys, *argv)[1]
    assert first == second
    rows = Table.from_csv(first).rows
    dg = [r[-1] for r in rows if r[0] == "discrete_gradient"]
    assert max(dg) - min(dg) < 1e-12


def test_out_file_and_json(tmp_path, capsys):
    path = tmp_path / "q.json"
    code, out, _ = _run(capsys, "--format", "json", "--out", str(path), "qexp", "--q", "0.5", "--x-grid=-1:1:5")
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["columns"] == ["x", "re_E", "im_E", "cos", "sin"]
    assert len(doc["rows"]) == 5
    for r in doc["rows"]:
        assert abs(r["cos"] ** 2 + r["sin"] ** 2 - 1) < 1e-13


def test_options_after_subcommand(capsys):
    code, out, _ = _run(capsys, "exp", "--alpha", "1", "--scale", "uniform:0:1:1", "--format", "json")
    assert code == 0
    assert json.loads(out)["rows"][1]["re"] == 3.0


def test_oscillator_command(capsys):
    code, out, _ = _run(capsys, "oscillator", "--omega0", "1.2", "--steps", "20", "--mu", "0.3")
    assert code == 0
    rows = Table.from_csv(out).rows
    residuals = [r[3] for r in rows if not np.isnan(r[3])] + [r[4] for r in rows if not np.isnan(r[4])]
    assert residuals and max(residuals) < 1e-11
    code, out, _ = _run(capsys, "oscillator", "--scheme", "implicit_midpoint", "--steps", "50")
    assert code == 0
    energy = [r[3] for r in Table.from_csv(out).rows]
    assert max(energy) - min(energy) < 1e-12


def test_lieflow_command(capsys):
    code, out, _ = _run(capsys, "lieflow", "--group", "so:2", "--A", "[[0,-1],[1,0]]", "--scale", "points:0,2")
    assert code == 0
    last = Table.from_csv(out).rows[-1]
    assert last[2:] == [0, 0, -1, 0, 1, 0, 0, 0]
    code, out, _ = _run(capsys, "lieflow", "--group", "su:2", "--A", '[["1i", "0.5"], ["-0.5", "-1i"]]',
                        "--A1", '[["0", "1i"], ["1i", "0"]]', "--scale", "uniform:0:0.1:50")
    assert code == 0
    assert max(r[1] for r in Table.from_csv(out).rows) < 1e-12


def test_max_terms_env(tmp_path):
    env = dict(os.environ, TSCALE_MAX_TERMS="3")
    proc = subprocess.run([sys.executable, "-m", "tscale.cli", "qexp", "--q", "0.999", "--x-grid", "1500"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 1
    assert "max_terms=3" in proc.stderr
