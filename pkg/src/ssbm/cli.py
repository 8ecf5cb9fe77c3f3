"""Command-line front end.

Subcommands: generate, census, sdp, csdp, test, sweep, oracles.  Exit codes:
0 success, 1 usage error, 2 numeric/solver failure, 3 oracle-suite failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .census import census_estimate
from .csdp import detection_test, estimate_unrevealed, solve_csdp
from .harness import ExperimentConfig, oracle_suite, run_sweep
from .model import ModelParams, centered_adjacency, sample_instance, write_instance
from .sdp import NumericError, SolverConfig, round_leading_eigvec, solve_elliptope


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _add_model_args(p, lists=False):
    nargs = "+" if lists else None
    typ = float
    p.add_argument("--n", type=int, nargs=nargs, required=True, help="vertex count (even)")
    p.add_argument("--a", type=typ, nargs=nargs, required=True, help="within-community rate")
    p.add_argument("--b", type=typ, nargs=nargs, required=True, help="cross-community rate")
    p.add_argument("--rho", type=typ, nargs=nargs, default=[0.0] if lists else 0.0,
                   help="reveal ratio in [0,1]")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def _add_solver_args(p):
    p.add_argument("--rank", type=int, default=None, help="factor width (default: sqrt rule)")
    p.add_argument("--tol", type=float, default=1e-6, help="relative per-sweep stopping change")
    p.add_argument("--max-sweeps", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=3)


def _solver_from(args) -> SolverConfig:
    return SolverConfig(rank=args.rank, tol=args.tol, max_sweeps=args.max_sweeps,
                        restarts=args.restarts, seed=args.seed)


def _params_from(args, erm=False) -> ModelParams:
    a, b = (args.a, args.b)
    if erm:
        d = 0.5 * (a + b)
        a = b = d
    return ModelParams(n=args.n, a=a, b=b, rho=args.rho, seed=args.seed)


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def build_parser() -> _Parser:
    top = _Parser(prog="ssbm", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample an instance and write the edge-list file")
    _add_model_args(p)
    p.add_argument("--out", required=True, help="output path for the edge-list file")

    p = sub.add_parser("census", help="run the census estimator on a sampled instance")
    _add_model_args(p)
    p.add_argument("--t", type=int, default=1, help="census depth")
    p.add_argument("--out", default=None, help="also write the JSON report here")

    for name in ("sdp", "csdp", "test"):
        p = sub.add_parser(name)
        _add_model_args(p)
        _add_solver_args(p)
        p.add_argument("--model", choices=("sbm", "erm"), default="sbm",
                       help="generative law of the sampled graph")
        p.add_argument("--out", default=None)
        if name == "test":
            p.add_argument("--delta", type=float, default=None,
                           help="test margin (default (a-b)/40)")

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep")
    p.add_argument("--config", default=None, help="JSON config file (overrides flags)")
    p.add_argument("--kind", choices=("census-sweep", "phase-grid", "detection-boxes",
                                      "sandwich-audit", "oracle-suite"), default=None)
    p.add_argument("--n", type=int, nargs="+", default=None)
    p.add_argument("--a", type=float, nargs="+", default=None)
    p.add_argument("--b", type=float, nargs="+", default=None)
    p.add_argument("--rho", type=float, nargs="+", default=None)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")
    _add_solver_args(p)

    p = sub.add_parser("oracles", help="run the exact-oracle self-check suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    return top


def _cmd_generate(args) -> int:
    g, rev = sample_instance(_params_from(args))
    write_instance(args.out, g, rev)
    print(f"wrote {g.n} vertices, {g.num_edges} edges, {rev.m} revealed to {args.out}")
    return 0


def _cmd_census(args) -> int:
    g, rev = sample_instance(_params_from(args))
    report = census_estimate(g, rev, t=args.t, seed=args.seed)
    _emit(args, json.loads(report.to_json()))
    return 0


def _cmd_sdp(args) -> int:
    params = _params_from(args, erm=args.model == "erm")
    g, rev = sample_instance(params)
    sol = solve_elliptope(centered_adjacency(g, params.d), _solver_from(args))
    est = round_leading_eigvec(sol, seed=args.seed)
    unrev = rev.unrevealed()
    overlap = abs(int(g.labels.values[unrev].astype(int) @ est[unrev].astype(int))) / max(unrev.size, 1)
    _emit(args, {**json.loads(sol.to_json()), "overlap_unrevealed": overlap})
    return 0


def _cmd_csdp(args) -> int:
    params = _params_from(args, erm=args.model == "erm")
    g, rev = sample_instance(params)
    csol = solve_csdp(g, rev, params.d, _solver_from(args))
    report = estimate_unrevealed(csol, rev, g.labels, seed=args.seed)
    _emit(args, {
        **json.loads(csol.inner.to_json()),
        "margin00": csol.aggregated.margin00 if csol.aggregated else 0.0,
        "overlap_unrevealed": report.overlap,
    })
    return 0


def _cmd_test(args) -> int:
    params = _params_from(args, erm=args.model == "erm")
    g, rev = sample_instance(params)
    csol = solve_csdp(g, rev, params.d, _solver_from(args))
    outcome = detection_test(csol.value, args.n, args.a, args.b, delta=args.delta)
    _emit(args, {**json.loads(outcome.to_json()), "model": args.model})
    return 0


def _cmd_sweep(args) -> int:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
    else:
        missing = [f for f in ("kind", "out") if getattr(args, f) is None]
        if args.kind != "oracle-suite":
            missing += [f for f in ("n", "a", "b", "rho") if getattr(args, f) is None]
        if missing:
            raise ValueError(f"sweep needs --config or flags: missing {', '.join('--' + f for f in missing)}")
        cfg = ExperimentConfig(
            kind=args.kind,
            n=tuple(args.n or ()), a=tuple(args.a or ()),
            b=tuple(args.b or ()), rho=tuple(args.rho or ()),
            reps=args.reps, solver=_solver_from(args), out_dir=args.out,
            seed=args.seed, t=args.t, workers=args.workers,
        )
    result = run_sweep(cfg)
    print(f"wrote {len(result.records)} records to {result.csv_path}")
    print(f"summary: {result.summary_path}")
    if cfg.kind == "oracle-suite" and not result.summary.get("passed", False):
        return 3
    return 0


def _cmd_oracles(args) -> int:
    report = oracle_suite(seed=args.seed)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report.passed else 3


_COMMANDS = {
    "generate": _cmd_generate,
    "census": _cmd_census,
    "sdp": _cmd_sdp,
    "csdp": _cmd_csdp,
    "test": _cmd_test,
    "sweep": _cmd_sweep,
    "oracles": _cmd_oracles,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"ssbm: error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ArithmeticError) as exc:
        print(f"ssbm: numeric failure: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything else from the solver stack
        print(f"ssbm: failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
