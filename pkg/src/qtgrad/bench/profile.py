"""Dolan-More performance profiles and CSV round-tripping."""

import csv
from dataclasses import dataclass
import math

RECORD_COLUMNS = ("solver", "problem", "iters", "nfe", "time", "converged", "residual")
CURVE_COLUMNS = ("solver", "rho", "fraction")


@dataclass(frozen=True)
class RunRecord:
    solver_id: str
    problem_id: str
    iterations: int
    nfe: int
    wall_time_s: float
    converged: bool
    final_residual: float

    def row(self):
        return [self.solver_id, self.problem_id, str(self.iterations), str(self.nfe),
                repr(float(self.wall_time_s)), "true" if self.converged else "false",
                repr(float(self.final_residual))]

    @classmethod
    def from_row(cls, row):
        return cls(row["solver"], row["problem"], int(row["iters"]), int(row["nfe"]),
                   float(row["time"]), row["converged"] == "true", float(row["residual"]))

    def without_time(self):
        return (self.solver_id, self.problem_id, self.iterations, self.nfe,
                self.converged, self.final_residual)


@dataclass(frozen=True)
class ProfileCurve:
    """Fraction of problems solved within a factor ``rho`` of the best solver.

    ``points`` holds ``(rho, fraction)`` pairs, ascending in ``rho``; the
    curve is a right-continuous step function between them.
    """

    solver_id: str
    points: tuple

    def fraction_at(self, rho):
        frac = 0.0
        for r, f in self.points:
            if r > rho:
                break
            frac = f
        return frac


def _metric(rec, metric):
    if metric == "iterations":
        return float(rec.iterations)
    if metric == "time":
        return float(rec.wall_time_s)
    if metric == "nfe":
        return float(rec.nfe)
    raise ValueError(f"unknown metric {metric!r}")


def performance_profile(records, metric="iterations"):
    """Profile curves of every solver in ``records``.

    A failed run has ratio infinity. When the best value on a problem is 0
    the ratio is 1 for runs that also scored 0 and infinity otherwise.
    Problems missing a solver count as failures for that solver.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to profile")
    solvers = sorted({r.solver_id for r in records})
    problems = sorted({r.problem_id for r in records})
    table = {(s, p): math.inf for s in solvers for p in problems}
    for r in records:
        if r.converged:
            table[(r.solver_id, r.problem_id)] = _metric(r, metric)
    curves = []
    ratios = {s: [] for s in solvers}
    for p in problems:
        best = min(table[(s, p)] for s in solvers)
        for s in solvers:
            t = table[(s, p)]
            if math.isinf(t):
                ratio = math.inf
            elif t == best:
                ratio = 1.0
            elif best == 0:
                ratio = math.inf
            else:
                ratio = t / best
            ratios[s].append(ratio)
    n = len(problems)
    for s in solvers:
        finite = sorted(r for r in ratios[s] if not math.isinf(r))
        pts = [(1.0, sum(1 for r in finite if r <= 1.0) / n)]
        for r in sorted(set(finite)):
            if r > 1.0:
                pts.append((r, sum(1 for q in finite if q <= r) / n))
        curves.append(ProfileCurve(s, tuple(pts)))
    return curves


def emit_csv(items, path):
    """Write RunRecords or ProfileCurves with a fixed header.

    ``path`` may be a filename or an open text stream.
    """
    items = list(items)
    if hasattr(path, "write"):
        _write_rows(items, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(items, fh)


def _write_rows(items, fh):
    w = csv.writer(fh, lineterminator="\n")
    if items and isinstance(items[0], ProfileCurve):
        w.writerow(CURVE_COLUMNS)
        for c in items:
            for rho, frac in c.points:
                w.writerow([c.solver_id, repr(float(rho)), repr(float(frac))])
    else:
        w.writerow(RECORD_COLUMNS)
        for r in items:
            w.writerow(r.row())


def read_records_csv(path):
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != RECORD_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(RECORD_COLUMNS)}")
        return [RunRecord.from_row(row) for row in rd]


def read_curves_csv(path):
    pts = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pts.setdefault(row["solver"], []).append((float(row["rho"]), float(row["fraction"])))
    return [ProfileCurve(s, tuple(p)) for s, p in pts.items()]
