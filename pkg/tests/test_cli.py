import csv
import json

import numpy as np
import pytest

from adsnull.cli import main


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_classify_json(tmp_path, capsys):
    assert main(["classify", "--g2", "4", "--g3", "0"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [p["case"] for p in rep["potentials"]] == ["WpNegDisc", "Wp3NegDisc"]
    out = tmp_path / "c.json"
    assert main(["classify", "--g2", "0", "--g3", "0", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["omega1"] == "+inf"
    assert rep["potentials"][0]["domain"] == ["-inf", 0.0]


def test_trajectory_both_and_roundtrip(tmp_path):
    out = tmp_path / "t.csv"
    args = ["trajectory", "--m", "0", "--g2", "5", "--g3", "0", "--case", "WpNegDisc", "--s0", "0.9"]
    args += ["--range", "0.3", "1.5", "--samples", "801", "--method", "both", "--out", str(out)]
    assert main(args) == 0
    rows = _read(out)
    assert rows[0][-1] == "deviation" and len(rows) == 802
    assert max(float(r[-1]) for r in rows[1:]) < 1e-8
    assert out.read_bytes().count(b"\r") == 0
    meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
    assert meta["command"] == "trajectory" and meta["config"]["samples"] == 801
    rep = tmp_path / "v.json"
    assert main(["verify", "--trajectory", str(out), "--out", str(rep)]) == 0
    checks = {c["name"]: c for c in json.loads(rep.read_text())["checks"]}
    assert checks["roundtrip_det"]["value"] == 0 and checks["roundtrip_nullity"]["value"] == 0


def test_trajectory_quasi_periodic(tmp_path):
    out = tmp_path / "q.csv"
    args = ["trajectory", "--m", "1", "--ell", "0.25", "--e1", "10", "--s0", "0", "--range", "0", "2"]
    assert main(args + ["--out", str(out)]) == 0
    rows = _read(out)
    s = np.array([float(r[0]) for r in rows[1:]])
    assert len(s) == 201 and s[0] == 0 and s[-1] == 2


def test_trajectory_deviation_exit(tmp_path):
    args = ["trajectory", "--m", "0", "--g2", "5", "--g3", "0", "--case", "WpNegDisc", "--s0", "0.9"]
    args += ["--range", "0.3", "1.5", "--method", "both", "--residual-tol", "1e-30", "--out", str(tmp_path / "x.csv")]
    assert main(args) == 1


def test_domain_error_modes(tmp_path, capsys):
    base = ["trajectory", "--m", "0", "--g2", "5", "--g3", "0", "--case", "WpNegDisc", "--s0", "0.9"]
    base += ["--range", "0.3", "5.0", "--samples", "50"]
    assert main(base + ["--out", str(tmp_path / "a.csv")]) == 2
    assert "OutOfDomain" in capsys.readouterr().err
    assert main(base + ["--domain-errors", "row", "--out", str(tmp_path / "b.csv")]) == 0
    rows = _read(tmp_path / "b.csv")
    assert 1 < len(rows) < 51


def test_invalid_input_exit(tmp_path):
    assert main(["trajectory", "--m", "0", "--s0", "1", "--range", "0", "1"]) == 2
    assert main(["trajectory", "--m", "0", "--ell", "1.5", "--e1", "1", "--s0", "0", "--range", "0", "1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--g2", "1"])
    assert exc.value.code == 2


def test_config_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples": 11, "residual_tol": 1e-3}))
    out = tmp_path / "t.csv"
    args = ["trajectory", "--m", "0", "--g2", "5", "--g3", "0", "--case", "WpNegDisc", "--s0", "0.9"]
    args += ["--range", "0.3", "1.5", "--config", str(cfg), "--out", str(out)]
    assert main(args) == 0
    assert len(_read(out)) == 12
    assert main(args + ["--samples", "21"]) == 0
    assert len(_read(out)) == 22
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(args) == 2


def test_verify_suite_and_inject(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "elliptic", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"]
    assert main(["verify", "--suite", "elliptic", "--inject", "legendre_relation", "--out", str(out)]) == 1
    rep = json.loads(out.read_text())
    bad = [c["name"] for c in rep["checks"] if not c["passed"]]
    assert bad == ["legendre_relation"]


def test_find_closed_empty(tmp_path, capsys):
    out = tmp_path / "h.csv"
    args = ["find-closed", "--m", "1", "--denom-bound", "1", "--n-max", "2", "--normalization", "plain"]
    assert main(args + ["--out", str(out)]) == 0
    assert len(_read(out)) == 1
    assert "no closed trajectory" in capsys.readouterr().err


def test_fscan_small(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["fscan", "--samples", "4", "--m-min", "-2", "--m-max", "2", "--jobs", "1", "--out", str(out)]) == 0
    rows = _read(out)
    assert rows[0] == ["m", "f", "in_w", "error", "note"] and len(rows) == 5
    meta = json.loads((tmp_path / "f.csv.meta.json").read_text())
    assert meta["summary"]["points"] == 4


def test_verify_all_defaults(tmp_path):
    out = tmp_path / "all.json"
    assert main(["verify", "--suite", "all", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and {c["suite"] for c in rep["checks"]} == {"elliptic", "potential", "frames", "periodic", "momentum"}
