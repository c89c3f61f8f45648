import csv
import io
import json
import math

import numpy as np
import pytest

from stressdist import cli, dist
from stressdist.cft2d import CftParams, energy_density_distribution


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def kv_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == 0
    return json.loads(out)


def test_dist_energy_density(capsys):
    d = kv_json(capsys, "dist", "--case", "energy-density", "-c", "1")
    assert d["omega0"] == pytest.approx(1 / (12 * math.pi))
    assert d["omega0_exact"]["exact"] == "1/12·π^-1"
    assert d["prob_negative"] == pytest.approx(0.84, abs=0.005)


def test_dist_chiral_and_phi2(capsys):
    assert kv_json(capsys, "dist", "--case", "chiral", "-c", "24")["alpha"] == 1.0
    d = kv_json(capsys, "dist", "--case", "phi2", "--window", "lorentzian")
    assert d["omega0_exact"]["exact"] == "1/96·π^-2"
    assert d["omega0"] == pytest.approx(1 / (96 * math.pi**2))
    d2 = kv_json(capsys, "dist", "--case", "phi2", "--tau", "2")
    assert d2["omega0"] == pytest.approx(d["omega0"] / 4)


def test_table1(capsys):
    code, out, _ = run(capsys, "table1", "--order", "8")
    assert code == 0
    assert out.count("PASS") == 9 and "30707616912" in out
    code, out, _ = run(capsys, "table1", "--order", "0", "--format", "csv")
    assert code == 0 and out.splitlines()[1] == "0,1,PASS"
    code, _, err = run(capsys, "table1", "--order", "9")
    assert code == cli.EXIT_BUDGET and "budget" in err
    code, out, _ = run(capsys, "table1", "--order", "9", "--budget", "9")
    assert code == 0 and "NEW" in out


def test_table1_reports_golden_mismatch(capsys, monkeypatch):
    monkeypatch.setattr("stressdist.wick4d.TABLE1", (1, 0, 3))
    code, out, _ = run(capsys, "table1", "--order", "2")
    assert code == cli.EXIT_FAIL and "FAIL" in out


def test_moments_and_qi(capsys):
    code, out, _ = run(capsys, "moments", "--engine", "cft2d", "-c", "1", "--order", "6",
                       "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[3][:2] == ["2", "1/24"]
    q = kv_json(capsys, "qi", "--window", "gaussian", "-c", "1")
    assert q["bound_exact"]["exact"] == "-1/24·π^-1"
    assert q["bound"] == pytest.approx(-1 / (24 * math.pi), rel=1e-14)
    q = kv_json(capsys, "qi", "--window", "squared-lorentzian", "--theory", "phi2")
    assert q["ratio"] == "3/2"
    assert q["conjectured_bound_exact"]["exact"] == "-1/24·π^-2"


def test_sample_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["sample", "--case", "energy-density", "-n", "100000", "--seed", "7",
                         "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    xs = np.loadtxt(a, skiprows=1)
    assert xs.size == 100000 and xs.min() >= -1 / (12 * math.pi)


def test_output_directory_override(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert cli.main(["table1", "--order", "2", "--output", "t.txt"]) == 0
    assert "PASS" in (tmp_path / "t.txt").read_text()


@pytest.mark.parametrize("argv", [
    ["dist", "--case", "energy-density", "--format", "json"],
    ["table1", "--format", "json"],
    ["moments", "--engine", "wick4d", "--order", "5", "--format", "json"],
    ["qi", "--window", "lorentzian", "--theory", "phi2", "--format", "json"],
    ["fig1", "--format", "json"],
])
def test_json_round_trip_is_byte_identical(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.dumps(json.loads(out), indent=2, sort_keys=True) + "\n" == out


@pytest.mark.parametrize("argv", [
    ["dist"],
    ["dist", "--case", "nonsense"],
    ["table1", "--order", "x"],
    ["qi", "--window", "gaussian", "--theory", "phi2"],
    ["dist", "--case", "chiral", "-c", "-1"],
    ["moments", "--engine", "wick4d", "--window", "gaussian"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = cli.main(argv)
        raise SystemExit(code)
    assert exc.value.code == cli.EXIT_USAGE


def _fig1(capsys):
    code, out, _ = run(capsys, "fig1", "-c", "1")
    assert code == 0
    lines = out.splitlines()
    meta = dict(line[2:].split("=") for line in lines if line.startswith("#"))
    data = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=",", comments="#", skiprows=4)
    return meta, data[:, 0], data[:, 1]


def test_fig1_metadata_and_grid(capsys):
    meta, x, p = _fig1(capsys)
    x0 = float(meta["x0"])
    assert x0 == pytest.approx(1 / (12 * math.pi), rel=1e-15)
    assert x.size == cli.FIG1_UNIFORM + cli.FIG1_LOG
    assert np.all(np.diff(x) > 0)
    assert x[0] + x0 == pytest.approx(1e-6, rel=1e-6)
    assert x[-1] == pytest.approx(0.3)


def test_fig1_density_is_normalized_and_decreasing(capsys):
    meta, x, p = _fig1(capsys)
    x0, alpha, beta = (float(meta[k]) for k in ("x0", "alpha", "beta"))
    assert np.all(p >= 0)
    assert np.all(np.diff(p) < 0)
    # the density is locally a power law in y = x + x0, so integrate each segment as one
    y = x + x0
    slope = np.log(p[1:] / p[:-1]) / np.log(y[1:] / y[:-1])
    body = np.sum(p[:-1] * y[:-1] / (slope + 1) * ((y[1:] / y[:-1]) ** (slope + 1) - 1))
    # endpoint patch: integral of beta^a y^(a-1) / Gamma(a) from 0 to the first offset
    y1 = x[0] + x0
    patch = (beta * y1) ** alpha / (alpha * math.gamma(alpha))
    # the grid stops at 0.3; add the exact mass beyond it
    d = energy_density_distribution(CftParams(1, 1.0))
    tail = 1.0 - dist.cdf(d, x[-1])
    assert body + patch + tail == pytest.approx(1.0, abs=1e-3)
