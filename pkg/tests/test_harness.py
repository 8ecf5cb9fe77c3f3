import json
import math

import numpy as np
import pytest

from ssbm import (ExperimentConfig, ResultRecord, SolverConfig,
                  best_threshold_accuracy, oracle_suite, run_sweep, snr,
                  summarize)
from ssbm.harness import RESULT_FIELDS, read_csv, write_csv


def _cfg(tmp_path, **over):
    base = dict(
        kind="census-sweep", n=(60,), a=(6.0,), b=(2.0,), rho=(0.3, 0.6),
        reps=3, solver=SolverConfig(restarts=1, seed=0), out_dir=str(tmp_path / "out"),
        seed=11, t=1, workers=1,
    )
    base.update(over)
    return ExperimentConfig(**base)


def test_config_json_round_trip(tmp_path):
    cfg = _cfg(tmp_path, kind="detection-boxes", rho=(0.25,))
    clone = ExperimentConfig.from_json(cfg.to_json())
    assert clone == cfg


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        _cfg(tmp_path, kind="nonsense")
    with pytest.raises(ValueError):
        _cfg(tmp_path, reps=0)
    with pytest.raises(ValueError):
        _cfg(tmp_path, n=())
    # b > a cells break non-phase-grid kinds at cell expansion
    bad = _cfg(tmp_path, a=(3.0,), b=(5.0,))
    with pytest.raises(ValueError):
        bad.cells()
    grid = _cfg(tmp_path, kind="phase-grid", a=(3.0, 6.0), b=(4.0,))
    assert grid.cells() == [(60, 6.0, 4.0, 0.3), (60, 6.0, 4.0, 0.6)]


def test_census_sweep_records_and_summary(tmp_path):
    cfg = _cfg(tmp_path)
    result = run_sweep(cfg)
    assert len(result.records) == 2 * 3  # cells x reps
    for rec in result.records:
        assert rec.algorithm == "census-1"
        assert rec.truth_model == "sbm"
        assert 0.0 <= rec.overlap_unrevealed <= 1.0
        assert rec.snr == snr(rec.a, rec.b)
    cells = result.summary["cells"]
    assert len(cells) == 2
    for cell in cells:
        assert "overlap_lower_curve" in cell["reference"]
        assert "erf_accuracy" in cell["reference"]
        grp = cell["groups"][0]
        assert grp["count"] == 3
        assert "overlap_unrevealed" in grp
    assert (tmp_path / "out" / "records.csv").exists()
    assert (tmp_path / "out" / "summary.json").exists()
    assert (tmp_path / "out" / "figure.svg").exists()
    svg = (tmp_path / "out" / "figure.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_csv_round_trip(tmp_path):
    result = run_sweep(_cfg(tmp_path))
    back = read_csv(tmp_path / "out" / "records.csv")
    assert back == result.records


def test_csv_schema_and_snr_recompute(tmp_path):
    result = run_sweep(_cfg(tmp_path))
    lines = (tmp_path / "out" / "records.csv").read_text().splitlines()
    assert lines[0].startswith("# created ")
    assert lines[1] == ",".join(RESULT_FIELDS)
    for ln in lines[2:]:
        parts = dict(zip(RESULT_FIELDS, ln.split(",")))
        n, a, b = int(parts["n"]), float(parts["a"]), float(parts["b"])
        assert float(parts["snr"]) == snr(a, b)


def _strip_volatile(path):
    lines = path.read_text().splitlines()
    rt_idx = RESULT_FIELDS.index("runtime_ms")
    out = []
    for ln in lines[1:]:  # drop timestamp comment
        parts = ln.split(",")
        if len(parts) == len(RESULT_FIELDS) and parts[0] != "seed":
            parts[rt_idx] = ""
        out.append(",".join(parts))
    return "\n".join(out)


def test_reproducibility_byte_identical_modulo_volatile(tmp_path):
    r1 = run_sweep(_cfg(tmp_path / "a"))
    r2 = run_sweep(_cfg(tmp_path / "b"))
    text1 = _strip_volatile(tmp_path / "a" / "out" / "records.csv")
    text2 = _strip_volatile(tmp_path / "b" / "out" / "records.csv")
    assert text1 == text2


def test_parallel_matches_serial(tmp_path):
    serial = run_sweep(_cfg(tmp_path / "s", kind="detection-boxes",
                            rho=(0.25,), reps=2, workers=1))
    parallel = run_sweep(_cfg(tmp_path / "p", kind="detection-boxes",
                              rho=(0.25,), reps=2, workers=3))
    strip = lambda recs: [tuple(getattr(r, f) for f in RESULT_FIELDS if f != "runtime_ms")
                          for r in recs]
    assert strip(serial.records) == strip(parallel.records)


def test_detection_sweep_shape(tmp_path):
    result = run_sweep(_cfg(tmp_path, kind="detection-boxes", rho=(0.25,), reps=2))
    # per rep: sdp + csdp rows for sbm and erm
    assert len(result.records) == 2 * 4
    algos = {(r.algorithm, r.truth_model) for r in result.records}
    assert algos == {("sdp", "sbm"), ("csdp", "sbm"), ("sdp", "erm"), ("csdp", "erm")}
    cell = result.summary["cells"][0]
    assert "detection" in cell
    det = cell["detection"]
    assert "csdp" in det and "sdp" in det
    assert det["threshold"] == 60 * ((6 - 2) / 2 - (6 - 2) / 40)
    assert "rho0" in det
    assert (tmp_path / "out" / "figure.svg").exists()
    for rec in result.records:
        if rec.algorithm == "csdp" and rec.truth_model == "sbm":
            assert rec.margin00 is not None
            assert rec.test_decision in (0, 1)


def test_unsupervised_cell_sdp_equals_csdp(tmp_path):
    result = run_sweep(_cfg(tmp_path, kind="phase-grid", rho=(0.0,), reps=2))
    sdp_vals = sorted(r.sdp_value for r in result.records if r.algorithm == "sdp")
    csdp_vals = sorted(r.csdp_value for r in result.records if r.algorithm == "csdp")
    assert sdp_vals == csdp_vals  # bit-identical degenerate sweep


def test_sandwich_audit_sweep(tmp_path):
    result = run_sweep(_cfg(tmp_path, kind="sandwich-audit", rho=(0.3,), reps=2))
    assert len(result.records) == 2
    assert all(r.test_decision == 1 for r in result.records)  # sandwich holds
    assert "sandwich" in result.summary
    assert len(result.summary["sandwich"]) == 2
    assert {"lower", "mid", "upper", "margin00", "holds"} <= set(result.summary["sandwich"][0])


def test_oracle_suite_sweep_kind(tmp_path):
    cfg = ExperimentConfig(kind="oracle-suite", n=(), a=(), b=(), rho=(), reps=1,
                           solver=SolverConfig(), out_dir=str(tmp_path / "o"), seed=0)
    result = run_sweep(cfg)
    assert result.summary["passed"] is True
    payload = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert payload["passed"] is True


def test_summarize_conventions():
    rec = ResultRecord(seed=1, rep=0, n=10, a=4, b=1, rho=0.2, snr=snr(4, 1),
                       algorithm="census-1", overlap_unrevealed=0.5,
                       sdp_value=None, csdp_value=None, margin00=None,
                       test_decision=None, truth_model="sbm", runtime_ms=1.0)
    summary = summarize([rec])
    grp = summary["cells"][0]["groups"][0]
    assert grp["overlap_unrevealed"]["stderr"] == 0.0
    assert grp["overlap_unrevealed"]["mean"] == 0.5
    with pytest.raises(ValueError):
        summarize([])


def test_record_validation():
    with pytest.raises(ValueError):
        ResultRecord(seed=1, rep=0, n=10, a=4, b=1, rho=0.2, snr=0.123,
                     algorithm="census-1", overlap_unrevealed=0.5,
                     sdp_value=None, csdp_value=None, margin00=None,
                     test_decision=None, truth_model="sbm", runtime_ms=1.0)
    with pytest.raises(ValueError):
        ResultRecord(seed=1, rep=0, n=10, a=4, b=1, rho=0.2, snr=snr(4, 1),
                     algorithm="census-1", overlap_unrevealed=1.5,
                     sdp_value=None, csdp_value=None, margin00=None,
                     test_decision=None, truth_model="sbm", runtime_ms=1.0)


def test_best_threshold_accuracy():
    assert best_threshold_accuracy([2.0, 3.0], [0.0, 1.0]) == 1.0
    assert best_threshold_accuracy([1.0], [1.0]) == 0.5
    assert abs(best_threshold_accuracy([1.0, 2.0, 3.0], [0.5, 1.5, 2.5]) - 4 / 6) < 1e-12
    with pytest.raises(ValueError):
        best_threshold_accuracy([], [1.0])


def test_shipped_configs_parse():
    import pathlib
    cfg_dir = pathlib.Path(__file__).resolve().parent.parent / "configs"
    names = {p.name for p in cfg_dir.glob("*.json")}
    assert {"census-sweep.json", "detection-boxes.json", "phase-grid.json"} <= names
    for path in sorted(cfg_dir.glob("*.json")):
        cfg = ExperimentConfig.from_json(path.read_text())
        assert cfg.cells()
    grid = ExperimentConfig.from_json((cfg_dir / "phase-grid.json").read_text())
    assert all(b <= a for _, a, b, _ in grid.cells())


def test_oracle_suite_report():
    report = oracle_suite(seed=0)
    assert report.passed
    names = {c.name for c in report.checks}
    assert {"binomial-gap-bound", "binomial-gap-canary", "cut-norm-exact",
            "grothendieck-bound", "sandwich-submatrix", "embedding-identity",
            "embedding-canary"} <= names
    payload = json.loads(report.to_json())
    assert all(c["passed"] for c in payload["checks"])
