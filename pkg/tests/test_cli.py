import csv
import io
import json
import math

import numpy as np
import pytest

from mfpp import MfppConfig, MixedStableParams
from mfpp import moments as M
from mfpp.cli import run


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = json.loads(lines[0][2:])
    body = [ln for ln in lines if not ln.startswith("#")]
    return meta, list(csv.DictReader(body))


def test_ml_prints_value_and_regime():
    code, out, _ = call(["ml", "--alpha", "1", "--beta", "1", "--x", "1.5"])
    value, regime = out.split()
    assert code == 0 and float(value) == pytest.approx(math.exp(1.5), rel=1e-14) and regime == "series"


def test_ml_json_file(tmp_path):
    path = tmp_path / "ml.json"
    assert call(["ml", "--alpha", "0.5", "--beta", "1", "--gamma", "2", "--x", "-30", "--out", str(path)])[0] == 0
    doc = json.loads(path.read_text())
    assert list(doc)[0] == "metadata" and doc["metadata"]["version"]
    assert doc["regime"] in ("asymptotic", "integral")


def test_moments_csv(tmp_path):
    path = tmp_path / "m.csv"
    code, _, _ = call(["moments", "--alpha1", "0.9", "--alpha2", "0.5", "--c1", "0.5", "--lambda", "2",
                       "--t-min", "0.1", "--t-max", "100", "--points", "20", "--spacing", "log", "--out", str(path)])
    assert code == 0
    meta, rows = read_csv(path)
    assert meta["lam"] == 2.0 and meta["c2"] == 0.5
    assert list(rows[0]) == ["t", "U", "varY", "U_asym", "varY_asym", "mfpp_mean", "mfpp_var"]
    assert len(rows) == 20
    cfg = MfppConfig(MixedStableParams(0.9, 0.5, 0.5, 0.5), 2.0)
    for r in rows[::5]:
        t = float(r["t"])
        assert float(r["U"]) == M.renewal_U(cfg.params, t)
        assert float(r["mfpp_var"]) == pytest.approx(M.mfpp_var(cfg, t), rel=1e-15)


def test_moments_linear_json():
    code, out, _ = call(["moments", "--t-min", "1", "--t-max", "3", "--points", "3", "--spacing", "linear",
                         "--format", "json", "--s", "1"])
    doc = json.loads(out)
    assert code == 0 and [r["t"] for r in doc["rows"]] == [1.0, 2.0, 3.0] and "covY" in doc["rows"][0]


def test_simulate_csv_and_summary(tmp_path):
    out, summ = tmp_path / "s.csv", tmp_path / "s.npz"
    argv = ["simulate", "--seed", "7", "--paths", "50", "--t-min", "1", "--t-max", "3", "--points", "3",
            "--out", str(out), "--summary", str(summ)]
    assert call(argv)[0] == 0
    meta, rows = read_csv(out)
    assert list(rows[0]) == ["replicate", "t", "value"] and len(rows) == 150
    assert meta["seed"] == 7 and meta["kind"] == "mfpp"
    data = np.load(summ)
    assert data["counts"].shape[0] == 3 and data["counts"].sum(axis=1).tolist() == [50, 50, 50]
    vals = np.array([int(r["value"]) for r in rows]).reshape(50, 3)
    np.testing.assert_allclose(data["mean"], vals.mean(axis=0))


def test_simulate_threads_byte_identical(tmp_path):
    base = ["simulate", "--seed", "11", "--paths", "40", "--points", "4", "--kind", "mfpn", "--ds", "0.01"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert call(base + ["--threads", "1", "--out", str(a)])[0] == 0
    assert call(base + ["--threads", "2", "--out", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_small_lrd_json(tmp_path):
    path = tmp_path / "fit.json"
    code, _, _ = call(["lrd", "--paths", "500", "--seed", "3", "--window", "5", "50", "--fit-points", "4",
                       "--out", str(path)])
    doc = json.loads(path.read_text())
    assert code == 0 and doc["verdict"] in ("consistent", "inconsistent") and doc["target"] == 0.5
    assert doc["n_used"] + doc["dropped"] == 4


@pytest.mark.parametrize("argv", [
    ["moments", "--alpha1", "0.4", "--alpha2", "0.5"],
    ["moments", "--lambda", "-1"],
    ["moments", "--t-min", "5", "--t-max", "1"],
    ["simulate", "--paths", "10"],
    ["simulate", "--seed", "-3"],
    ["ml", "--alpha", "0", "--beta", "1", "--x", "1"],
    ["moments", "--bogus-flag", "1"],
    ["frobnicate"],
])
def test_validation_errors_exit_1(argv):
    code, out, err = call(argv)
    assert code == 1 and err.count("\n") == 1 and err.startswith("mfpp: error")


def test_numeric_failure_exit_2(tmp_path):
    code, _, err = call(["ml", "--alpha", "0.05", "--beta", "1", "--x", "4"])
    assert code == 2 and "numerical failure" in err


def test_atomic_write_leaves_no_temp(tmp_path):
    path = tmp_path / "m.csv"
    call(["moments", "--points", "2", "--out", str(path)])
    assert [p.name for p in tmp_path.iterdir()] == ["m.csv"]
    assert call(["moments", "--points", "2", "--out", str(tmp_path / "missing" / "x.csv")])[0] == 1


def test_scap_exit_2(monkeypatch):
    from mfpp import cli
    from mfpp.errors import SCapExceeded

    def boom(*a, **k):
        raise SCapExceeded("walk stayed below t_max")

    monkeypatch.setattr(cli, "simulate_ensemble", boom)
    code, _, err = call(["simulate", "--seed", "1", "--paths", "2"])
    assert code == 2 and "numerical failure" in err
