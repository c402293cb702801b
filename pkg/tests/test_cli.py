import csv
import io
import json
import subprocess
import sys

import pytest

from slabcavity.cli import COLUMNS, main

SWEEP = """\
geometry:
  length_unit: nm
  h: 2500
  b: 500
  delta: [-300, 0, 300]
temperatures: [300]
"""


def _write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def _metadata(text):
    line = next(ln for ln in text.splitlines() if ln.startswith("# metadata: "))
    return json.loads(line[len("# metadata: "):])


def test_force_sweep_csv(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["force-sweep", _write(tmp_path, SWEEP), "--out", str(out)]) == 0
    text = out.read_text()
    rows = _csv_rows(text)
    assert list(rows[0]) == COLUMNS["force-sweep"]
    f = [float(r["pressure_N_m2"]) for r in rows]
    assert f[0] == -f[2] and f[1] == 0.0 and f[2] > 0
    assert all(r["status"] == "ok" for r in rows)
    meta = _metadata(text)
    for key in ("version", "constants", "sign_convention", "tolerances", "materials", "kernel_backend"):
        assert key in meta
    assert set(meta["materials"]) == {"wall", "slab", "gap"}


def test_output_is_deterministic_across_runs_and_workers(tmp_path):
    cfg = _write(tmp_path, SWEEP)
    outs = []
    for i, workers in enumerate((1, 1, 2)):
        out = tmp_path / f"o{i}.json"
        assert main(["force-sweep", cfg, "--format", "json", "--workers", str(workers), "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    # the rows do not depend on how they were scheduled
    assert json.loads(outs[0])["rows"] == json.loads(outs[2])["rows"]


def test_json_schema(tmp_path, capsys):
    assert main(["taylor", _write(tmp_path, SWEEP), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"] == COLUMNS["taylor"]
    row = dict(zip(doc["columns"], doc["rows"][0]))
    assert row["a1_N_m3"] > 0
    assert row["a1_ideal_N_m3"] == pytest.approx(3.3283e-25 * 2.5e-6**-5, rel=1e-4)


def test_freq_shift_and_compare(tmp_path, capsys):
    cfg = SWEEP + "oscillator:\n  k_spring: 1.0e6\n  m_area: 1.35e-3\n"
    assert main(["freq-shift", _write(tmp_path, cfg)]) == 0
    row = _csv_rows(capsys.readouterr().out)[0]
    assert float(row["shift_exact_rad_s"]) == pytest.approx(float(row["shift_first_order_rad_s"]), rel=0.01)
    cmp = "geometry:\n  length_unit: nm\n  a: 1000\n  delta: {start: 0, stop: 50, num: 11}\noscillator:\n  k_spring: 1e6\n"
    assert main(["compare-geometries", _write(tmp_path, cmp, "c.yaml")]) == 0
    rows = _csv_rows(capsys.readouterr().out)
    assert float(rows[0]["closed_correction"]) == 0.0 and float(rows[0]["open_correction"]) == 0.0
    last = rows[-1]
    assert abs(float(last["closed_correction"])) < abs(float(last["open_correction"]))


def test_thickness(tmp_path, capsys):
    cfg = SWEEP.replace("b: 500", "b: [20, 40]").replace("[-300, 0, 300]", "[0, 300]")
    assert main(["thickness", _write(tmp_path, cfg)]) == 0
    rows = _csv_rows(capsys.readouterr().out)
    centre = [r for r in rows if float(r["delta_m"]) == 0.0]
    assert all(float(r["thickness_correction_N_m2"]) == 0.0 for r in centre)
    off = [r for r in rows if float(r["delta_m"]) > 0]
    assert abs(float(off[1]["thickness_correction_N_m2"])) < abs(float(off[0]["thickness_correction_N_m2"]))


def test_validate_pass_and_mutation(tmp_path, capsys):
    cfg = _write(tmp_path, "materials: {wall: al_drude, slab: teflon_fep, gap: vacuum}\noptions: {n_draws: 8}\n")
    assert main(["validate", cfg]) == 0
    capsys.readouterr()
    assert main(["validate", cfg, "--inject-delta-sign-flip"]) == 2
    captured = capsys.readouterr()
    assert "oracle_stress_effective" in captured.err


def test_validate_vacuum_is_trivial(tmp_path, capsys):
    cfg = _write(tmp_path, "materials: {wall: vacuum, slab: vacuum, gap: vacuum}\noptions: {n_draws: 4}\n")
    assert main(["validate", cfg, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(r[1] == 0.0 or r[3] for r in doc["rows"])


def test_config_errors_exit_1(tmp_path, capsys):
    assert main(["force-sweep", _write(tmp_path, SWEEP.replace("h: 2500", "h: -5"))]) == 1
    assert "run.yaml:3:" in capsys.readouterr().err
    assert main(["freq-shift", _write(tmp_path, SWEEP)]) == 1
    assert "oscillator.k_spring" in capsys.readouterr().err
    assert main(["force-sweep", str(tmp_path / "nope.yaml")]) == 1
    assert main(["force-sweep", _write(tmp_path, SWEEP), "--workers", "0"]) == 1


def test_convergence_rows_and_strict_mode(tmp_path, capsys):
    cfg = _write(tmp_path, SWEEP + "tolerances:\n  rel_tol: 1e-15\n  abs_tol: 0\n  max_subdivisions: 1\n")
    assert main(["force-sweep", cfg]) == 0
    rows = _csv_rows(capsys.readouterr().out)
    assert any(r["status"].startswith("convergence") for r in rows)
    assert main(["force-sweep", cfg, "--strict"]) == 3


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "slabcavity.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in COLUMNS:
        assert cmd in out.stdout
