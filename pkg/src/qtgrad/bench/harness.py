"""Experiment suites: solver x problem grids at desk scale."""

import time

import numpy as np

from ..config import SolverConfig
from ..eigsolver import solve_eigen
from ..linops import LaplacianOperator
from ..problems import (SLBGenSpec, SpectrumSpec, build_svm_dual, gen_2d_termination_case,
                        gen_diagonal_hard, gen_random_box, gen_random_quadratic, gen_random_slb,
                        make_two_gaussians)
from ..projgrad import solve_projected
from ..quadsolver import solve_abb, solve_bb1, solve_bb_new_once, solve_quadratic
from ..testfuncs import get_function, list_functions
from ..uncsolver import solve_unconstrained
from .profile import RunRecord

SUITES = ("termination2d", "rand-quad", "diag-quad", "unc", "eig", "box", "slb", "svm")

DEFAULT_EPS = {
    "termination2d": (1e-10,),
    "rand-quad": (1e-6, 1e-9, 1e-12),
    "diag-quad": (1e-6, 1e-9, 1e-12),
    "unc": (1e-6,),
    "eig": (1e-3,),
    "box": (1e-6,),
    "slb": (1e-6,),
    "svm": (1e-3, 1e-6, 1e-9),
}

SOLVERS = {
    "termination2d": ("bb1", "bb1+new", "bb2+new"),
    "rand-quad": ("adaptive", "bb1", "abb"),
    "diag-quad": ("adaptive", "bb1", "abb"),
    "unc": ("adaptive", "bb1"),
    "eig": ("adaptive", "bb1"),
    "box": ("adaptive", "bb1"),
    "slb": ("adaptive", "bb1"),
    "svm": ("adaptive", "bb1"),
}

DEFAULT_N = {"rand-quad": 500, "diag-quad": 500, "eig": 8, "box": 200, "slb": 200, "svm": 200}

ABB_TAU = 0.15


def _config(base, cfg):
    if cfg is None:
        return base
    if isinstance(cfg, SolverConfig):
        return cfg
    return base.with_(**cfg)


def _record(solver, problem, fn):
    t0 = time.perf_counter()
    try:
        iters, nfe, conv, res = fn()
    except Exception:  # a failed run is data, not a crash
        return RunRecord(solver, problem, 0, 0, time.perf_counter() - t0, False, float("inf"))
    return RunRecord(solver, problem, int(iters), int(nfe), time.perf_counter() - t0,
                     bool(conv), float(res))


def _quad_run(solver, p, cfg):
    def go():
        if solver == "adaptive":
            r = solve_quadratic(p, cfg)
        elif solver == "bb1":
            r = solve_bb1(p, cfg)
        else:
            r = solve_abb(p, ABB_TAU, cfg)
        return r.iterations, r.ngev, r.converged, r.residual
    return go


def _termination2d(seed, eps_list, n, cfg, solvers):
    recs = []
    variants = {"bb1": ("bb1", None), "bb1+new": ("bb1", 3), "bb2+new": ("bb2", 3)}
    eps = eps_list[0]
    for lam in (10, 100, 1000, 10000):
        for i in range(10):
            p = gen_2d_termination_case(lam, seed=seed * 1000 + i)
            for sid in solvers or variants:
                variant, at = variants[sid]

                def go(p=p, variant=variant, at=at):
                    r = solve_bb_new_once(p, variant, new_at=at, n_iter=5)
                    rel = r.grad_norm_history[-1] / r.grad_norm_history[0]
                    return r.iterations, r.ngev, rel <= eps, rel
                recs.append(_record(sid, f"{p.name}", go))
    return recs


def _rand_quad(seed, eps_list, n, cfg, solvers):
    recs = []
    for sid in range(1, 6):
        for i in range(10):
            p = gen_random_quadratic(SpectrumSpec(sid, n, 1e5), seed=seed * 1000 + i)
            for eps in eps_list:
                c = cfg.with_(eps=eps)
                for s in solvers or ("adaptive", "bb1", "abb"):
                    recs.append(_record(s, f"{p.name}@{eps:g}", _quad_run(s, p, c)))
    return recs


def _diag_quad(seed, eps_list, n, cfg, solvers):
    recs = []
    for kappa in (1e4, 1e5, 1e6):
        for i in range(10):
            p = gen_diagonal_hard(n, kappa, seed=seed * 1000 + i)
            for eps in eps_list:
                c = cfg.with_(eps=eps)
                for s in solvers or ("adaptive", "bb1", "abb"):
                    recs.append(_record(s, f"{p.name}@{eps:g}", _quad_run(s, p, c)))
    return recs


def _unc(seed, eps_list, n, cfg, solvers):
    recs = []
    for name in list_functions():
        f, x0 = get_function(name)
        for eps in eps_list:
            for s in solvers or ("adaptive", "bb1"):
                c = cfg.with_(eps=eps, scheme="bb1" if s == "bb1" else cfg.scheme)

                def go(f=f, x0=x0, c=c):
                    r = solve_unconstrained(f, x0, c)
                    return r.iterations, r.nfev, r.converged, r.residual
                recs.append(_record(s, f"{name}@{eps:g}", go))
    return recs


def _eig(seed, eps_list, n, cfg, solvers):
    recs = []
    A = LaplacianOperator(n, n, n)
    truth = A.eigenvalues()
    for r in (1, 2, 5, 10, 20):
        if r > A.n:
            continue
        for eps in eps_list:
            for s in solvers or ("adaptive", "bb1"):
                c = cfg.with_(eps=eps, seed=seed, scheme="bb1" if s == "bb1" else cfg.scheme)

                def go(r=r, c=c):
                    rep = solve_eigen(A, r, c, eigenvalues_true=truth)
                    return rep.iterations, rep.nfe, rep.converged, rep.grad_norm
                recs.append(_record(s, f"lap{n}-r{r}@{eps:g}", go))
    return recs


def _planted(gen, seed, eps_list, n, cfg, solvers):
    recs = []
    for ncond in (2, 4):
        for ndeg in (1, 3):
            for frac in (0.1, 0.5):
                for i in range(2):
                    na = int(frac * n)
                    spec = SLBGenSpec(n, ncond, ndeg, na, na)
                    qp, _ = gen(spec, seed=seed * 1000 + i)
                    for eps in eps_list:
                        for s in solvers or ("adaptive", "bb1"):
                            c = cfg.with_(eps=eps, scheme="bb1" if s == "bb1" else cfg.scheme)

                            def go(qp=qp, c=c):
                                r = solve_projected(qp.objective(), qp.constraint, qp.x0, c)
                                res = r.residual if c.stop_rule == "residual" else r.info["step_norm"]
                                return r.iterations, r.nfev, r.converged, res
                            recs.append(_record(s, f"{qp.name}-na{na}@{eps:g}", go))
    return recs


def _box(seed, eps_list, n, cfg, solvers):
    return _planted(gen_random_box, seed, eps_list, n, cfg, solvers)


def _slb(seed, eps_list, n, cfg, solvers):
    return _planted(gen_random_slb, seed, eps_list, n, cfg, solvers)


def _svm(seed, eps_list, n, cfg, solvers):
    recs = []
    data = make_two_gaussians(n, seed=seed)
    qp = build_svm_dual(data, C=1.0, sigma_kernel=np.sqrt(10.0))
    for eps in eps_list:
        for s in solvers or ("adaptive", "bb1"):
            c = cfg.with_(eps=eps, scheme="bb1" if s == "bb1" else cfg.scheme)

            def go(c=c):
                r = solve_projected(qp.objective(), qp.constraint, qp.x0, c)
                return r.iterations, r.nfev, r.converged, r.info["step_norm"]
            recs.append(_record(s, f"{qp.name}-seed{seed}@{eps:g}", go))
    return recs


_RUNNERS = {
    "termination2d": _termination2d, "rand-quad": _rand_quad, "diag-quad": _diag_quad,
    "unc": _unc, "eig": _eig, "box": _box, "slb": _slb, "svm": _svm,
}


def run_suite(suite_id, cfg=None, seed=0, eps=None, n=None, solvers=None):
    """Run one experiment suite and return its records.

    Parameters
    ----------
    suite_id : str
        One of :data:`SUITES`.
    cfg : SolverConfig or dict, optional
        A full configuration, or overrides applied to the suite default
        (SLB-type suites start from :meth:`SolverConfig.for_slb`).
    seed : int
        Base seed for every generated instance.
    eps : float, optional
        Run a single tolerance instead of the suite's default list.
    n : int, optional
        Problem size (grid side for ``eig``).
    solvers : sequence of str, optional
        Subset of the suite's solver ids.

    Returns
    -------
    list of RunRecord
        Sorted by ``(solver_id, problem_id)``.
    """
    if suite_id not in _RUNNERS:
        raise ValueError(f"unknown suite {suite_id!r}; choose from {', '.join(SUITES)}")
    if solvers is not None:
        bad = sorted(set(solvers) - set(SOLVERS[suite_id]))
        if bad:
            raise ValueError(f"unknown solvers {bad} for {suite_id}; choose from "
                             f"{', '.join(SOLVERS[suite_id])}")
    base = SolverConfig.for_slb() if suite_id in ("slb", "svm") else SolverConfig()
    c = _config(base, cfg)
    eps_list = (eps,) if eps is not None else DEFAULT_EPS[suite_id]
    size = n if n is not None else DEFAULT_N.get(suite_id)
    recs = _RUNNERS[suite_id](seed, eps_list, size, c, solvers)
    return sorted(recs, key=lambda r: (r.solver_id, r.problem_id))
