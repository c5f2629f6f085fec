"""Command line entry point: ``qtgrad-bench run <suite>`` / ``profile <csv>``."""

import argparse
import json
import sys

from .harness import SUITES, run_suite
from .profile import emit_csv, performance_profile, read_records_csv


def _summary(records, out):
    by = {}
    for r in records:
        s = by.setdefault(r.solver_id, [0, 0, 0, 0.0])
        s[0] += 1
        s[1] += r.converged
        s[2] += r.iterations
        s[3] += r.wall_time_s
    out.write(f"{'solver':12s} {'runs':>5s} {'solved':>6s} {'iters':>9s} {'time[s]':>8s}\n")
    for sid in sorted(by):
        n, ok, it, t = by[sid]
        out.write(f"{sid:12s} {n:5d} {ok:6d} {it:9d} {t:8.2f}\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="qtgrad-bench", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run an experiment suite")
    run.add_argument("suite", choices=SUITES)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--eps", type=float, default=None, help="single tolerance instead of the suite list")
    run.add_argument("--n", type=int, default=None, help="problem size (grid side for eig)")
    run.add_argument("--out", default=None, help="records CSV path (stdout if omitted)")
    run.add_argument("--config", default=None, help="JSON file with SolverConfig overrides")
    run.add_argument("--solvers", default=None, help="comma-separated solver ids")
    prof = sub.add_parser("profile", help="performance profile from a records CSV")
    prof.add_argument("records")
    prof.add_argument("--metric", choices=("iterations", "time", "nfe"), default="iterations")
    prof.add_argument("--out", default=None)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.cmd == "run":
        overrides = None
        if args.config:
            with open(args.config) as fh:
                overrides = json.load(fh)
        solvers = args.solvers.split(",") if args.solvers else None
        recs = run_suite(args.suite, overrides, seed=args.seed, eps=args.eps, n=args.n,
                         solvers=solvers)
        emit_csv(recs, args.out or sys.stdout)
        _summary(recs, sys.stderr)
        return 0
    recs = read_records_csv(args.records)
    curves = performance_profile(recs, args.metric)
    emit_csv(curves, args.out or sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
