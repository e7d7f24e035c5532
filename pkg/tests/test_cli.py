import json
import math
import subprocess
import sys

import pytest

from pathcalc.cli import main, resolve_config

CIRCLE = json.dumps({"vertices": [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 0]]})


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def test_integrate_inv_z(capsys):
    code, rep, _ = call(capsys, "integrate", "--fn", "inv_z", "--path", CIRCLE)
    assert code == 0 and rep["verdict"] == "positive"
    re, im = rep["result"]["value"]
    assert abs(complex(re, im) - 2j * math.pi) < 1e-6
    assert rep["schema_version"] == 1 and rep["command"] == "integrate"


def test_norm_dxm_exp(capsys):
    code, rep, _ = call(capsys, "norm", "--space", "dxm", "--fn", "exp", "--set", "disk", "--M", "factorial", "--depth", "30")
    assert code == 0
    assert rep["result"]["partial"] == pytest.approx(math.e**2, abs=1e-4)
    assert rep["result"]["converged"]


def test_demo_zigzag(capsys):
    code, rep, _ = call(capsys, "demo", "zigzag", "--N", "6", "--h", "1e-3")
    assert code == 0
    trace = rep["result"]["trace"]
    assert [t["n"] for t in trace] == list(range(1, 7))
    assert all(abs(complex(*t["quotient"]) - 1) < 1e-9 for t in trace)
    for s in rep["result"]["sup_g"]:
        assert s["sup_g"] <= s["bound"] * (1 + 1e-12)


def test_negative_verdict_exit_two(capsys):
    code, rep, _ = call(capsys, "mseq", "check", "--M", "ones", "--upto", "10")
    assert code == 2 and rep["verdict"] == "negative"
    assert rep["result"]["algebra"]["first_violation"] == [1, 1]


def test_fderiv_verify_exit_codes(capsys):
    base = ["fderiv", "verify", "--set", "square_vertical", "--f", "re_part", "--g", "0", "--h", "0.05"]
    code, rep, _ = call(capsys, *base, "--family", "vertical")
    assert code == 0
    code, rep, _ = call(capsys, *base, "--family", "grid")
    assert code == 2 and rep["result"]["normalized"] >= 0.9


def test_malformed_json_reports_position(capsys):
    code, rep, err = call(capsys, "integrate", "--fn", "inv_z", "--path", '{"vertices": [[1,0],')
    assert code == 1
    assert "line 1, column 21" in rep["error"]["message"]
    assert "result" not in rep and "verdict" not in rep
    assert err.startswith("pathcalc: error:")


def test_unknown_corpus_exit_one(capsys):
    code, rep, _ = call(capsys, "demo", "nope")
    assert code == 1
    assert rep["error"]["type"] == "UnknownCorpusError"


def test_missing_file(capsys):
    code, rep, _ = call(capsys, "integrate", "--fn", "inv_z", "--path", "/nonexistent/path.json")
    assert code == 1 and "cannot read" in rep["error"]["message"]


def test_bad_number_flag(capsys):
    assert main(["integrate", "--fn", "inv_z", "--path", CIRCLE, "--tol", "abc"]) == 1
    assert "--tol expects a number" in capsys.readouterr().err
    assert main(["integrate", "--fn", "inv_z", "--path", CIRCLE, "--tol", "-1"]) == 1


def test_deterministic_reports(capsys, monkeypatch):
    argv = ["demo", "many_components", "--N", "4"]
    a = call(capsys, *argv)[1]
    b = call(capsys, *argv)[1]
    a.pop("generated_at"), b.pop("generated_at")
    assert a == b
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    main(argv)
    x = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == x
    assert '"generated_at": "1970-01-01T00:00:00+00:00"' in x


def test_svg_and_csv_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        svg, csv = tmp_path / f"a{i}.svg", tmp_path / f"a{i}.csv"
        assert main(["demo", "zigzag", "--N", "5", "--h", "1e-3", "--svg", str(svg), "--csv", str(csv)]) == 0
        outs.append((svg.read_bytes(), csv.read_bytes()))
    capsys.readouterr()
    assert outs[0] == outs[1]
    assert outs[0][0].startswith(b"<?xml")
    assert outs[0][1].splitlines()[0].startswith(b"n,")


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["integrate", "--fn", "z2", "--path", CIRCLE, "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    rep = json.loads(out.read_text())
    assert abs(complex(*rep["result"]["value"])) < 1e-12
    assert "out" not in rep["params"]


def test_config_merge(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fn": "exp", "depth": 12, "seed": 7}))
    c = resolve_config(["norm", "--config", str(cfg), "--depth", "20"])
    assert c.command == ("norm",)
    assert c.params["fn"] == "exp" and c.params["depth"] == 20 and c.seed == 7
    assert c.params["space"] == "dxm"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["norm", "--config", str(cfg)]) == 1


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("PATHCALC_NUM_THREADS", "1")
    assert main(["integrate", "--fn", "inv_z", "--path", CIRCLE]) == 0
    monkeypatch.setenv("PATHCALC_NUM_THREADS", "many")
    assert main(["integrate", "--fn", "inv_z", "--path", CIRCLE]) == 1
    capsys.readouterr()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pathcalc", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("pathcalc ")
    r = subprocess.run([sys.executable, "-m", "pathcalc", "frobnicate"], capture_output=True, text=True)
    assert r.returncode == 1
    assert "invalid choice" in r.stderr
