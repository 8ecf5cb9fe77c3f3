"""Experiment harness: seeded Monte Carlo sweeps, statistics, figure data.

A sweep walks the cartesian grid of model parameters, runs ``reps``
replications per cell (optionally across worker processes), and emits one CSV
row per (cell, rep, algorithm) plus a JSON summary with per-cell statistics
and reference curves.  Rows carry the cell's nominal (a, b) even for the
matched-degree null model; the truth_model column says which generative law
produced the graph.
"""

from __future__ import annotations

import dataclasses
import datetime
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .census import (binomial_gap_oracle, census_estimate, delta_gap,
                     overlap_lower_curve, predict_accuracy_erf)
from .csdp import aggregate, detection_test, estimate_unrevealed, sandwich_check, solve_csdp
from .model import (Labels, MatrixOperator, ModelParams, RevealedLabels,
                    centered_adjacency, sample_instance, snr)
from .rng import derive_key, stream
from .sdp import (SolverConfig, cut_norm_exact, grothendieck_check,
                  round_leading_eigvec, solve_elliptope)

SWEEP_KINDS = ("census-sweep", "phase-grid", "detection-boxes", "sandwich-audit", "oracle-suite")

RESULT_FIELDS = (
    "seed", "rep", "n", "a", "b", "rho", "snr", "algorithm",
    "overlap_unrevealed", "sdp_value", "csdp_value", "margin00",
    "test_decision", "truth_model", "runtime_ms",
)


@dataclass(frozen=True)
class ResultRecord:
    """One measurement row; optional fields are None when not applicable."""

    seed: int
    rep: int
    n: int
    a: float
    b: float
    rho: float
    snr: float
    algorithm: str
    overlap_unrevealed: float | None
    sdp_value: float | None
    csdp_value: float | None
    margin00: float | None
    test_decision: int | None
    truth_model: str
    runtime_ms: float

    def __post_init__(self):
        if self.overlap_unrevealed is not None and not (-1e-12 <= self.overlap_unrevealed <= 1 + 1e-12):
            raise ValueError("overlap must lie in [0, 1]")
        if abs(self.snr - snr(self.a, self.b)) > 1e-12:
            raise ValueError("snr column disagrees with (a, b)")

    def csv_row(self) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)
        return ",".join(fmt(getattr(self, f)) for f in RESULT_FIELDS)


def write_csv(path, records: list[ResultRecord], timestamp: str | None = None) -> None:
    """Rows in the declared field order; the leading comment line carries the
    creation timestamp and is outside the determinism contract."""
    stamp = timestamp or datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(path, "w") as fh:
        fh.write(f"# created {stamp}\n")
        fh.write(",".join(RESULT_FIELDS) + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")


def read_csv(path) -> list[ResultRecord]:
    records = []
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    if tuple(header) != RESULT_FIELDS:
        raise ValueError("unexpected CSV header")
    for ln in lines[1:]:
        parts = ln.split(",")
        vals = dict(zip(RESULT_FIELDS, parts))
        records.append(ResultRecord(
            seed=int(vals["seed"]), rep=int(vals["rep"]), n=int(vals["n"]),
            a=float(vals["a"]), b=float(vals["b"]), rho=float(vals["rho"]),
            snr=float(vals["snr"]), algorithm=vals["algorithm"],
            overlap_unrevealed=float(vals["overlap_unrevealed"]) if vals["overlap_unrevealed"] else None,
            sdp_value=float(vals["sdp_value"]) if vals["sdp_value"] else None,
            csdp_value=float(vals["csdp_value"]) if vals["csdp_value"] else None,
            margin00=float(vals["margin00"]) if vals["margin00"] else None,
            test_decision=int(vals["test_decision"]) if vals["test_decision"] else None,
            truth_model=vals["truth_model"],
            runtime_ms=float(vals["runtime_ms"]),
        ))
    return records


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep: kind, parameter grid (cartesian product of the lists),
    replications per cell, solver settings, output directory, master seed."""

    kind: str
    n: tuple[int, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]
    rho: tuple[float, ...]
    reps: int
    solver: SolverConfig
    out_dir: str
    seed: int
    t: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.t < 1 or self.workers < 1:
            raise ValueError("t and workers must be >= 1")
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "rho", tuple(float(v) for v in self.rho))
        if self.kind != "oracle-suite" and not (self.n and self.a and self.b and self.rho):
            raise ValueError("parameter grid must be non-empty")

    def cells(self) -> list[tuple[int, float, float, float]]:
        """Grid cells (n, a, b, rho).  The phase-grid kind silently skips
        infeasible b > a combinations; other kinds reject them."""
        out = []
        for n, a, b, rho in itertools.product(self.n, self.a, self.b, self.rho):
            try:
                ModelParams(n=n, a=a, b=b, rho=rho)
                snr(a, b)
            except ValueError:
                if self.kind == "phase-grid":
                    continue
                raise
            out.append((n, a, b, rho))
        if not out and self.kind != "oracle-suite":
            raise ValueError("parameter grid contains no valid cell")
        return out

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        params = raw.get("params", {})
        solver = raw.get("solver", {})
        return cls(
            kind=raw["kind"],
            n=tuple(params.get("n", ())),
            a=tuple(params.get("a", ())),
            b=tuple(params.get("b", ())),
            rho=tuple(params.get("rho", ())),
            reps=raw.get("reps", 1),
            solver=SolverConfig(
                rank=solver.get("rank"),
                tol=solver.get("tol", 1e-6),
                max_sweeps=solver.get("max_sweeps", 2000),
                restarts=solver.get("restarts", 3),
                seed=solver.get("seed", 0),
            ),
            out_dir=raw["out_dir"],
            seed=raw.get("seed", 0),
            t=raw.get("t", 1),
            workers=raw.get("workers", 1),
        )

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "params": {"n": list(self.n), "a": list(self.a),
                       "b": list(self.b), "rho": list(self.rho)},
            "reps": self.reps,
            "solver": {"rank": self.solver.rank, "tol": self.solver.tol,
                       "max_sweeps": self.solver.max_sweeps,
                       "restarts": self.solver.restarts, "seed": self.solver.seed},
            "out_dir": self.out_dir,
            "seed": self.seed,
            "t": self.t,
            "workers": self.workers,
        }, indent=2)


def _overlap_unrevealed(estimates: np.ndarray, labels: Labels, rev: RevealedLabels) -> float:
    unrev = rev.unrevealed()
    truth = labels.values[unrev].astype(np.int64)
    return abs(int(truth @ estimates[unrev].astype(np.int64))) / max(unrev.size, 1)


def _cell_task(cfg: ExperimentConfig, ci: int, cell, rep: int):
    """All records (and summary extras) for one (cell, rep) replication.

    A failing replication (e.g. the census has nothing to estimate at
    rho = 1) is recorded as a single 'error' row and the sweep continues.
    """
    n, a, b, rho = cell
    iseed = derive_key(cfg.seed, "sweep", ci, rep)
    base = dict(rep=rep, n=n, a=a, b=b, rho=rho, snr=snr(a, b))
    try:
        return _cell_task_inner(cfg, ci, cell, rep, iseed, base)
    except Exception as exc:
        row = ResultRecord(
            seed=iseed, algorithm="error", overlap_unrevealed=None,
            sdp_value=None, csdp_value=None, margin00=None, test_decision=None,
            truth_model="sbm", runtime_ms=0.0, **base)
        return [row], {"type": "error", "cell": ci, "rep": rep, "error": str(exc)}


def _cell_task_inner(cfg: ExperimentConfig, ci: int, cell, rep: int, iseed: int, base: dict):
    n, a, b, rho = cell
    solver = dataclasses.replace(cfg.solver, seed=derive_key(iseed, "solver"))
    records, extras = [], None

    def sbm_instance():
        return sample_instance(ModelParams(n=n, a=a, b=b, rho=rho, seed=iseed))

    if cfg.kind == "census-sweep":
        g, rev = sbm_instance()
        t0 = time.perf_counter()
        report = census_estimate(g, rev, t=cfg.t, seed=iseed)
        records.append(ResultRecord(
            seed=iseed, algorithm=f"census-{cfg.t}",
            overlap_unrevealed=report.overlap, sdp_value=None, csdp_value=None,
            margin00=None, test_decision=None, truth_model="sbm",
            runtime_ms=(time.perf_counter() - t0) * 1e3, **base))

    elif cfg.kind == "phase-grid":
        g, rev = sbm_instance()
        records.extend(_solve_pair(g, rev, cell, iseed, base, solver, "sbm"))

    elif cfg.kind == "detection-boxes":
        d = 0.5 * (a + b)
        g, rev = sbm_instance()
        records.extend(_solve_pair(g, rev, cell, iseed, base, solver, "sbm"))
        nseed = derive_key(cfg.seed, "sweep", ci, rep, "erm")
        g0, rev0 = sample_instance(ModelParams(n=n, a=d, b=d, rho=rho, seed=nseed))
        nsolver = dataclasses.replace(cfg.solver, seed=derive_key(nseed, "solver"))
        records.extend(_solve_pair(g0, rev0, cell, nseed, base, nsolver, "erm"))

    elif cfg.kind == "sandwich-audit":
        g, rev = sbm_instance()
        d = 0.5 * (a + b)
        t0 = time.perf_counter()
        report = sandwich_check(g, rev, d, solver)
        csol_value = report.mid
        records.append(ResultRecord(
            seed=iseed, algorithm="csdp",
            overlap_unrevealed=None, sdp_value=report.upper, csdp_value=csol_value,
            margin00=report.margin00, test_decision=int(report.holds), truth_model="sbm",
            runtime_ms=(time.perf_counter() - t0) * 1e3, **base))
        extras = {"type": "sandwich", "cell": ci, "rep": rep, **dataclasses.asdict(report)}

    else:
        raise ValueError(f"kind {cfg.kind!r} has no per-cell task")
    return records, extras


def _solve_pair(g, rev, cell, iseed, base, solver, truth_model):
    """Unsupervised SDP and constrained CSDP rows for one instance."""
    n, a, b, rho = cell
    d = 0.5 * (a + b)
    M = centered_adjacency(g, d)
    out = []

    t0 = time.perf_counter()
    sdp_sol = solve_elliptope(M, solver)
    est = round_leading_eigvec(sdp_sol, seed=iseed)
    out.append(ResultRecord(
        seed=iseed, algorithm="sdp",
        overlap_unrevealed=_overlap_unrevealed(est, g.labels, rev),
        sdp_value=sdp_sol.value, csdp_value=None, margin00=None,
        test_decision=None, truth_model=truth_model,
        runtime_ms=(time.perf_counter() - t0) * 1e3, **base))

    t0 = time.perf_counter()
    csol = solve_csdp(g, rev, d, solver)
    report = estimate_unrevealed(csol, rev, g.labels, seed=iseed)
    decision = detection_test(csol.value, n, a, b).decision if a > b else None
    out.append(ResultRecord(
        seed=iseed, algorithm="csdp",
        overlap_unrevealed=report.overlap,
        sdp_value=None, csdp_value=csol.value,
        margin00=csol.aggregated.margin00 if csol.aggregated else None,
        test_decision=decision, truth_model=truth_model,
        runtime_ms=(time.perf_counter() - t0) * 1e3, **base))
    return out


@dataclass(frozen=True)
class SweepResult:
    records: list
    summary: dict
    csv_path: str
    summary_path: str


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Execute a sweep and write records.csv + summary.json (+ figure SVG).

    Deterministic: every (cell, rep) task derives its seeds from
    (cfg.seed, cell index, rep index), so any worker count yields the same
    records, serialized in (cell, rep) order.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, "records.csv")
    summary_path = os.path.join(cfg.out_dir, "summary.json")

    if cfg.kind == "oracle-suite":
        report = oracle_suite(seed=cfg.seed)
        with open(summary_path, "w") as fh:
            fh.write(report.to_json())
        write_csv(csv_path, [])
        return SweepResult([], json.loads(report.to_json()), csv_path, summary_path)

    cells = cfg.cells()
    tasks = [(ci, cell, rep) for ci, cell in enumerate(cells) for rep in range(cfg.reps)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_cell_task, itertools.repeat(cfg),
                                    *zip(*((ci, cell, rep) for ci, cell, rep in tasks)),
                                    chunksize=1))
    else:
        results = [_cell_task(cfg, ci, cell, rep) for ci, cell, rep in tasks]

    records, extras = [], []
    for recs, extra in results:
        records.extend(recs)
        if extra is not None:
            extras.append(extra)

    summary = summarize(records, t=cfg.t)
    sandwich_extras = [e for e in extras if e.get("type") == "sandwich"]
    error_extras = [e for e in extras if e.get("type") == "error"]
    if sandwich_extras:
        summary["sandwich"] = sandwich_extras
    if error_extras:
        summary["errors"] = error_extras
    write_csv(csv_path, records)
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    svg = _figure_svg(cfg, records, summary)
    if svg is not None:
        with open(os.path.join(cfg.out_dir, "figure.svg"), "w") as fh:
            fh.write(svg)
    return SweepResult(records, summary, csv_path, summary_path)


def _stats(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    qs = np.percentile(arr, [0, 25, 50, 75, 100])
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "stderr": float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0,
        "min": float(qs[0]), "q1": float(qs[1]), "median": float(qs[2]),
        "q3": float(qs[3]), "max": float(qs[4]),
    }


def best_threshold_accuracy(positive: list[float], negative: list[float]) -> float:
    """Best achievable accuracy of the rule 'declare positive iff value >= t'."""
    if not positive or not negative:
        raise ValueError("both samples must be non-empty")
    cuts = sorted(set(positive) | set(negative))
    thresholds = [cuts[0] - 1.0] + [0.5 * (u + v) for u, v in zip(cuts, cuts[1:])] + [cuts[-1] + 1.0]
    total = len(positive) + len(negative)
    best = 0.0
    for th in thresholds:
        hits = sum(1 for v in positive if v >= th) + sum(1 for v in negative if v < th)
        best = max(best, hits / total)
    return best


def summarize(records: list[ResultRecord], t: int = 1) -> dict:
    """Per-cell statistics over every value column each group carries.

    Detection cells (both truth models present) additionally report the
    separation score min(SBM) - max(ERM) and the best-threshold accuracy for
    each solver statistic, plus the test threshold and rho0.
    """
    if not records:
        raise ValueError("cannot summarize an empty record set")
    cells: dict[tuple, dict] = {}
    for rec in records:
        cells.setdefault((rec.n, rec.a, rec.b, rec.rho), {}). \
            setdefault((rec.algorithm, rec.truth_model), []).append(rec)

    out_cells = []
    for (n, a, b, rho), groups in sorted(cells.items()):
        entry = {
            "cell": {"n": n, "a": a, "b": b, "rho": rho},
            "snr": snr(a, b),
            "groups": [],
        }
        if a + b > 0:
            entry["reference"] = {
                "overlap_lower_curve": overlap_lower_curve(a, b, rho),
                "erf_accuracy": predict_accuracy_erf(a, b, rho, t),
            }
        for (algorithm, truth_model), recs in sorted(groups.items()):
            gstat = {"algorithm": algorithm, "truth_model": truth_model, "count": len(recs)}
            for field in ("overlap_unrevealed", "sdp_value", "csdp_value", "margin00"):
                values = [getattr(r, field) for r in recs if getattr(r, field) is not None]
                if values:
                    gstat[field] = _stats(values)
            decisions = [r.test_decision for r in recs if r.test_decision is not None]
            if decisions:
                gstat["decision_rate"] = sum(decisions) / len(decisions)
            entry["groups"].append(gstat)

        detection = {}
        for algorithm, field in (("sdp", "sdp_value"), ("csdp", "csdp_value")):
            sbm = [getattr(r, field) for r in groups.get((algorithm, "sbm"), [])
                   if getattr(r, field) is not None]
            erm = [getattr(r, field) for r in groups.get((algorithm, "erm"), [])
                   if getattr(r, field) is not None]
            if sbm and erm:
                detection[algorithm] = {
                    "separation": min(sbm) - max(erm),
                    "best_threshold_accuracy": best_threshold_accuracy(sbm, erm),
                }
        if detection:
            if a > b:
                probe = detection_test(0.0, n, a, b)
                detection["threshold"] = probe.threshold
                detection["rho0"] = probe.rho0
            entry["detection"] = detection
        out_cells.append(entry)
    return {"cells": out_cells}


# ---------------------------------------------------------------- figures --

def _svg_header(w, h, title):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">\n<rect width="{w}" height="{h}" fill="white"/>\n'
            f'<text x="{w/2}" y="18" text-anchor="middle" font-size="14">{title}</text>\n')


def _figure_svg(cfg: ExperimentConfig, records, summary) -> str | None:
    if cfg.kind == "census-sweep":
        return _census_svg(summary, cfg.t)
    if cfg.kind == "detection-boxes":
        return _boxes_svg(summary)
    return None


def _census_svg(summary, t) -> str:
    pts, ref = [], []
    for cell in summary["cells"]:
        rho = cell["cell"]["rho"]
        for grp in cell["groups"]:
            if grp["algorithm"].startswith("census") and "overlap_unrevealed" in grp:
                pts.append((rho, grp["overlap_unrevealed"]["mean"]))
        if "reference" in cell:
            ref.append((rho, cell["reference"]["overlap_lower_curve"]))
    pts.sort()
    ref.sort()
    w, h, pad = 480, 320, 46

    def xmap(rho):
        return pad + rho * (w - 2 * pad)

    def ymap(v):
        return h - pad - v * (h - 2 * pad)

    def path(seq, color, dash=""):
        d = " ".join(f"{xmap(x):.1f},{ymap(y):.1f}" for x, y in seq)
        return f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>\n'

    svg = _svg_header(w, h, f"census t={t}: mean unrevealed overlap vs reveal ratio")
    svg += f'<line x1="{pad}" y1="{h-pad}" x2="{w-pad}" y2="{h-pad}" stroke="black"/>\n'
    svg += f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h-pad}" stroke="black"/>\n'
    if pts:
        svg += path(pts, "#1f66b0")
        svg += "".join(f'<circle cx="{xmap(x):.1f}" cy="{ymap(y):.1f}" r="2.5" fill="#1f66b0"/>\n'
                       for x, y in pts)
    if ref:
        svg += path(ref, "#8043a3", dash=' stroke-dasharray="6 4"')
    return svg + "</svg>\n"


def _boxes_svg(summary) -> str:
    boxes = []
    for cell in summary["cells"]:
        tag = f'a={cell["cell"]["a"]:g},b={cell["cell"]["b"]:g}'
        for grp in cell["groups"]:
            field = "sdp_value" if grp["algorithm"] == "sdp" else "csdp_value"
            if field in grp:
                boxes.append((f'{tag} {grp["algorithm"]}/{grp["truth_model"]}', grp[field]))
    if not boxes:
        return _svg_header(320, 80, "no solver values") + "</svg>\n"
    w, h, pad = 120 + 90 * len(boxes), 360, 52
    lo = min(b["min"] for _, b in boxes)
    hi = max(b["max"] for _, b in boxes)
    span = (hi - lo) or 1.0

    def ymap(v):
        return h - pad - (v - lo) / span * (h - 2 * pad)

    svg = _svg_header(w, h, "solver value distributions")
    for idx, (label, st) in enumerate(boxes):
        cx = pad + 50 + 90 * idx
        bw = 30
        svg += (f'<line x1="{cx}" y1="{ymap(st["min"]):.1f}" x2="{cx}" '
                f'y2="{ymap(st["max"]):.1f}" stroke="black"/>\n')
        top, bot = ymap(st["q3"]), ymap(st["q1"])
        svg += (f'<rect x="{cx-bw/2}" y="{top:.1f}" width="{bw}" height="{bot-top:.1f}" '
                f'fill="#9ec5e8" stroke="black"/>\n')
        svg += (f'<line x1="{cx-bw/2}" y1="{ymap(st["median"]):.1f}" x2="{cx+bw/2}" '
                f'y2="{ymap(st["median"]):.1f}" stroke="black" stroke-width="2"/>\n')
        svg += (f'<text x="{cx}" y="{h-20}" text-anchor="middle" font-size="9" '
                f'transform="rotate(25 {cx} {h-20})">{label}</text>\n')
    return svg + "</svg>\n"


# ----------------------------------------------------------- oracle suite --

@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class OracleReport:
    checks: tuple
    passed: bool

    def to_json(self) -> str:
        return json.dumps({
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
        }, indent=2)


def aggregate_dense_reference(M: np.ndarray, reveal_values: np.ndarray) -> np.ndarray:
    """Aggregated matrix built directly from its defining equations.

    Independent of :func:`ssbm.csdp.aggregate`: plain loops over a dense M.
    Row/column 0 collects the label-signed revealed entries; the interior is
    M restricted to unrevealed vertices in sorted order.
    """
    M = np.asarray(M, dtype=np.float64)
    x = np.asarray(reveal_values, dtype=np.float64)
    revealed = np.flatnonzero(x != 0)
    unrev = np.flatnonzero(x == 0)
    dim = unrev.size + 1
    out = np.zeros((dim, dim))
    for i in revealed:
        for j in revealed:
            out[0, 0] += M[i, j] * x[i] * x[j]
    for jj, p in enumerate(unrev, start=1):
        s = 0.0
        for i in revealed:
            s += x[i] * M[i, p]
        out[0, jj] = out[jj, 0] = s
    for ii, p in enumerate(unrev, start=1):
        for jj, q in enumerate(unrev, start=1):
            out[ii, jj] = M[p, q]
    return out


def _random_feasible_objectives(M: np.ndarray, rev: RevealedLabels, agg_dense: np.ndarray,
                                rng: np.random.Generator, points: int = 20) -> float:
    """Max |objective(full constrained point) - objective(mapped point)|."""
    x = rev.values.astype(np.float64)
    unrev = rev.unrevealed()
    n = M.shape[0]
    k = 5
    worst = 0.0
    for _ in range(points):
        tau = rng.standard_normal((unrev.size + 1, k))
        tau /= np.linalg.norm(tau, axis=1, keepdims=True)
        full = np.empty((n, k))
        full[rev.revealed_set] = np.outer(x[rev.revealed_set], tau[0])
        full[unrev] = tau[1:]
        obj_full = float(np.einsum("ij,ik,jk->", M, full, full))
        obj_agg = float(np.einsum("ij,ik,jk->", agg_dense, tau, tau))
        worst = max(worst, abs(obj_full - obj_agg))
    return worst


def _check(name, passed, detail) -> OracleCheck:
    return OracleCheck(name=name, passed=bool(passed), detail=detail)


def oracle_suite(seed: int = 0) -> OracleReport:
    """Fixed-seed battery of every exact-oracle property plus mutation
    canaries that prove the checks can fail."""
    checks = []

    # binomial gap bound: exact DP gap dominates the closed-form constant
    grid = [(a, b, trials) for a in (3, 5, 9) for b in (1, 2)
            for trials in (100, 1000)]
    worst = min(binomial_gap_oracle(trials, a, b) - delta_gap(a, b)
                for a, b, trials in grid)
    checks.append(_check("binomial-gap-bound", worst >= 0,
                         f"min oracle-minus-delta over grid = {worst:.3e}"))

    # canary: breaking the exponential damping must violate the bound
    tampered = max(binomial_gap_oracle(trials, a, b) - (a - b) * math.exp(a + b) / 2.0
                   for a, b, trials in grid)
    checks.append(_check("binomial-gap-canary", tampered < 0,
                         "sign-flipped exponent is detected" if tampered < 0
                         else "tampered constant slipped through"))

    d52 = delta_gap(5, 2)
    checks.append(_check("delta-gap-value", abs(d52 - 3.0 / (2.0 * math.e ** 7)) < 1e-15,
                         f"delta(5,2) = {d52:.6e}"))

    cn = cut_norm_exact(np.diag([1.0, -1.0]))
    ones = cut_norm_exact(np.ones((4, 4)))
    zero = cut_norm_exact(np.zeros((3, 3)))
    checks.append(_check("cut-norm-exact", cn == 2.0 and ones == 16.0 and zero == 0.0,
                         f"diag->{cn}, ones->{ones}, zero->{zero}"))

    rng = stream(seed, "oracle-grothendieck")
    g_ok = True
    worst_ratio = 0.0
    for _ in range(10):
        M = rng.choice([-1.0, 1.0], size=(10, 10))
        M = np.triu(M) + np.triu(M, 1).T
        rep = grothendieck_check(M, SolverConfig(restarts=2, seed=int(rng.integers(2**32))))
        g_ok &= rep.passed
        if math.isfinite(rep.ratio):
            worst_ratio = max(worst_ratio, rep.ratio)
    checks.append(_check("grothendieck-bound", g_ok, f"max sdp/cut ratio = {worst_ratio:.4f}"))

    sw_ok, sub_ok = True, True
    for s in range(3):
        g, rev = sample_instance(ModelParams(n=120, a=9, b=2, rho=0.3, seed=derive_key(seed, "oracle-sw", s)))
        rep = sandwich_check(g, rev, 5.5, SolverConfig(restarts=2, seed=s))
        sub_ok &= rep.submatrix_ok
        if rep.margin_nonneg:
            sw_ok &= rep.holds
    checks.append(_check("sandwich-submatrix", sw_ok and sub_ok,
                         "sandwich and submatrix inequalities hold on seeded instances"))

    # embedding identity: operator aggregation == defining equations, and the
    # feasible-point objectives of the two formulations coincide
    rng = stream(seed, "oracle-embed")
    n, m = 20, 6
    Mdense = rng.standard_normal((n, n))
    Mdense = 0.5 * (Mdense + Mdense.T)
    labels = np.array([1] * (n // 2) + [-1] * (n // 2), dtype=np.int8)
    rng.shuffle(labels)
    plus = np.flatnonzero(labels == 1)[: m // 2]
    minus = np.flatnonzero(labels == -1)[: m // 2]
    rv = np.zeros(n, dtype=np.int8)
    rv[plus], rv[minus] = 1, -1
    rev = RevealedLabels(rv, np.sort(np.concatenate([plus, minus])))
    agg = aggregate(MatrixOperator.from_dense(Mdense), rev)
    ref = aggregate_dense_reference(Mdense, rv)
    ent_err = float(np.max(np.abs(agg.op.to_dense() - ref)))
    obj_err = _random_feasible_objectives(Mdense, rev, ref, rng)
    checks.append(_check("embedding-identity", ent_err < 1e-12 and obj_err < 1e-9,
                         f"entry error {ent_err:.2e}, objective error {obj_err:.2e}"))

    tampered_ref = ref.copy()
    tampered_ref[0, 0] += 1e-3
    obj_bad = _random_feasible_objectives(Mdense, rev, tampered_ref, rng)
    checks.append(_check("embedding-canary", obj_bad > 1e-9,
                         f"margin tampering detected ({obj_bad:.2e})"))

    return OracleReport(checks=tuple(checks), passed=all(c.passed for c in checks))
