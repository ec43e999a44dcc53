import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import oracles
from dickehubbard.cli import RunConfig, emit_report, execute, main, run
from dickehubbard.io import read_csv_table


def _run(cfg):
    out, err = io.StringIO(), io.StringIO()
    code = run(cfg, out, err)
    return code, out.getvalue(), err.getvalue()


def test_bands_csv_middle_column_constant(tmp_path):
    path = tmp_path / "bands.csv"
    code = main(["bands", "--zeta", "0.18", "--lambda", "0.3", "--grid", "201x1", "--out", str(path)])
    assert code == 0
    header, cols, rows = read_csv_table(path)
    assert cols == ["k", "E_l_re", "E_l_im", "E_m_re", "E_m_im", "E_h_re", "E_h_im", "stable"]
    assert header["model"] == {"omega_a": 1.0, "omega_b": 1.0, "omega_spin": 1.0, "zeta": 0.18,
                               "lambda": 0.3, "geometry": "chain1d"}
    assert header["grid"]["k_points"] == 201
    mid = np.array([float(r[3]) for r in rows])
    assert len(rows) == 201 and np.max(np.abs(mid - 1.0)) < 1e-12
    low = np.array([float(r[1]) for r in rows])
    assert low.min() == pytest.approx(oracles.LOWER_K0_03, abs=1e-12)
    assert path.read_text().startswith("# dickehubbard bands\n# {")


def test_classify_prints_unstable(capsys):
    assert main(["classify", "--k", "0", "--lambda", "0.48", "--zeta", "0.18"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "Unstable"
    assert lines[1].startswith("classify: grid[") and "wall=" in lines[1] and "stable=0/1" in lines[1]


def test_classify_honeycomb(capsys):
    assert main(["classify", "--geometry", "honeycomb2d", "--k", "0,0", "--lambda", "0.34",
                 "--zeta", "0.12"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "Normal"


def test_invalid_model_exit_3(capsys):
    assert main(["bands", "--zeta", "0.3", "--grid", "8x1"]) == 3
    err = capsys.readouterr().err
    assert "|zeta/omega| < 1/4" in err


def test_config_errors_exit_2(tmp_path, capsys):
    code, _, err = _run({"task": "bands", "grids": {"k_points": 8, "typo": 1}})
    assert code == 2 and "grids.typo" in err
    code, _, err = _run({"task": "classify", "model": {"zeta": 0.1}})
    assert code == 2 and "'k'" in err
    code, _, err = _run({"task": "bands", "model": {"zeta": -0.1}})
    assert code == 2
    bad = tmp_path / "c.json"
    bad.write_text("{not json")
    assert main(["bands", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"task": "ldos"}))
    assert main(["bands", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_io_errors_exit_4(tmp_path, capsys):
    assert main(["crossings", "--out", str(tmp_path / "missing" / "x.csv")]) == 4
    assert main(["crossings", "--config", str(tmp_path / "nope.json")]) == 4
    capsys.readouterr()


def test_domain_error_exit_3(capsys):
    # every k unstable in the normal phase far above the boundary
    code, _, err = _run({"task": "ldos", "branch": "normal", "model": {"zeta": 0.18, "lambda": 0.7},
                         "grids": {"k_points": 16}})
    assert code == 3 and "NoStableSamples" in err


def test_byte_identical_output(tmp_path):
    cfg = {"task": "phase-diagram", "model": {"zeta": 0.18},
           "grids": {"k_points": 24, "lambda_points": 11}}
    texts = []
    for name in ("a.csv", "b.csv"):
        cfg["output"] = {"path": str(tmp_path / name)}
        assert _run(cfg)[0] == 0
        texts.append((tmp_path / name).read_bytes())
    assert texts[0] == texts[1]


def test_phase_diagram_report_and_json(tmp_path):
    path = tmp_path / "pd.json"
    code, out, _ = _run({"task": "phase-diagram", "model": {"zeta": 0.18},
                         "grids": {"k_points": 33, "lambda_points": 21},
                         "output": {"path": str(path), "format": "json"}})
    assert code == 0 and "lambda_sc: 0.4664761516" in out
    doc = json.loads(path.read_text())
    assert doc["columns"] == ["k", "lambda", "label", "E_nor_re", "E_nor_im", "E_sup_re", "E_sup_im"]
    assert len(doc["rows"]) == 33 * 21
    assert doc["header"]["grid"]["lambda_range"] == [0.2, 0.7]
    assert {r[2] for r in doc["rows"]} <= {"Normal", "Superradiant", "Overlap", "Unstable"}


def test_flatband_scan_report():
    res = execute(RunConfig.model_validate({"task": "flatband-scan", "model": {"zeta": 0.18},
                                            "grids": {"lambda_values": [0.1, 0.3]}}))
    flat = res.report["flat_bands"]
    assert [f["band"] for f in flat] == [1, 1]
    assert all(abs(f["energy"] - 1.0) < 1e-12 and f["flatness"] < 1e-10 for f in flat)
    text = emit_report(res)
    assert text.count("flat band:") == 2 and "energy=1 " in text


def test_crossings_report():
    res = execute(RunConfig.model_validate({"task": "crossings"}))
    ks = res.report["crossings"]
    assert len(ks) == 6 and all(abs(math.cos(k) + 0.5) < 1e-10 for k in ks)
    assert "crossings k:" in emit_report(res)


def test_ldos_and_intersection_tasks(tmp_path):
    res = execute(RunConfig.model_validate({"task": "ldos", "model": {"zeta": 0.18, "lambda": 0.3},
                                            "grids": {"k_points": 128}}))
    assert res.columns == ["energy", "cavity_a", "cavity_b", "spins"]
    assert len(res.rows) == 400 and res.report["mode_fractions"]["cavity_a"] < 1e-10
    res2 = execute(RunConfig.model_validate({"task": "intersection-2d", "model": {"zeta": 0.12,
                                             "geometry": "honeycomb2d"}, "grids": {"resolution": 64}}))
    assert res2.rows and max(abs(r[2]) for r in res2.rows) < 1e-8


def test_auto_branch_superradiant():
    res = execute(RunConfig.model_validate({"task": "bands", "model": {"zeta": 0.18, "lambda": 0.542},
                                            "grids": {"k_points": 64}}))
    assert res.report["branch"] == "superradiant" and res.report["flat_bands"] == []


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dickehubbard", "crossings"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("crossings:")
