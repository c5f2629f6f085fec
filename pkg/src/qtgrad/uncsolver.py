"""Nonmonotone gradient method for smooth unconstrained minimization."""

import numpy as np

from .config import SolveReport, SolverConfig, check_gradient
from .errors import LineSearchError
from .linesearch import GLLMemory, backtrack
from .stepsize import BBPair, TauController, adaptive_next, clamp, fallback_step


def initial_stepsize(x1, g1):
    """``||x1||_inf / ||g1||_inf`` if ``x1 != 0``, else ``1 / ||g1||_inf``."""
    gn = float(np.max(np.abs(g1)))
    if gn == 0.0:
        raise ValueError("zero gradient: the starting point is already stationary")
    xn = float(np.max(np.abs(x1)))
    return (xn if xn > 0 else 1.0) / gn


def solve_unconstrained(f, x0, cfg=None, check_grad=False, callback=None):
    """Minimize ``f`` with the adaptive BB stepsize and GLL line search.

    Parameters
    ----------
    f : Objective
        Provides ``fun`` and ``grad``.
    x0 : array_like
        Starting point.
    cfg : SolverConfig, optional
        ``eps`` bounds the final ``||g||_inf``.
    check_grad : bool
        Compare ``f.grad`` with central differences at ``x0`` first and raise
        ``ValueError`` when the relative error exceeds 1e-5.
    callback : callable, optional
        Called as ``callback(k, x, g, alpha)`` after every accepted step.

    Returns
    -------
    SolveReport
        ``termination`` is ``"converged"``, ``"max_iter"`` or
        ``"line_search_failed"``.
    """
    cfg = cfg or SolverConfig()
    x = np.array(x0, dtype=np.float64)
    if check_grad:
        err = check_gradient(f, x, rng=cfg.seed)
        if err > 1e-5:
            raise ValueError(f"gradient inconsistent with function (rel. error {err:.2e})")
    fx = float(f.fun(x))
    g = np.asarray(f.grad(x), dtype=np.float64)
    nfev, ngev = 1, 1
    mem = GLLMemory(cfg.M)
    mem.push(fx)
    rep = SolveReport(x=x, f=fx, iterations=0, termination="max_iter", residual=0.0)
    rep.f_history.append(fx)
    gnorm = float(np.max(np.abs(g)))
    rep.grad_norm_history.append(gnorm)
    if gnorm <= cfg.eps:
        rep.termination = "converged"
        rep.residual = gnorm
        rep.nfev, rep.ngev = nfev, ngev
        return rep

    alpha = clamp(initial_stepsize(x, g), cfg.alpha_min, cfg.alpha_max)
    tau = TauController(cfg.tau1, 1.0 if cfg.scheme == "fixed" else cfg.gamma)
    # scheme "bb1" never takes the short branch
    use_short = cfg.scheme != "bb1"
    prev = None
    k = 1
    while gnorm > cfg.eps:
        if k > cfg.max_iter:
            break
        d = -g
        gd = float(g @ d)
        f_r = mem.f_ref
        try:
            lam, f_new, x_new, evals = backtrack(f.fun, x, d, alpha, f_r, gd, cfg.sigma, cfg.delta)
        except LineSearchError as exc:
            rep.termination = "line_search_failed"
            rep.info["error"] = str(exc)
            break
        nfev += evals
        rep.line_search.append((f_r, lam, gd, float(f_new)))
        rep.stepsize_trace.append(alpha)
        g_new = np.asarray(f.grad(x_new), dtype=np.float64)
        ngev += 1
        s = x_new - x
        y = g_new - g
        x, g, fx = x_new, g_new, float(f_new)
        mem.push(fx)
        rep.f_history.append(fx)
        gnorm = float(np.max(np.abs(g)))
        rep.grad_norm_history.append(gnorm)

        sy = float(s @ y)
        if sy > 0:
            pair = BBPair(float(s @ s) / sy, sy / float(y @ y))
            alpha, tau, short = adaptive_next(prev if use_short else None, pair, tau)
            rep.branches.append("short" if short else "long")
            prev = pair
        else:
            alpha = fallback_step(x, g)
            rep.branches.append("fallback")
            prev = None
        alpha = clamp(alpha, cfg.alpha_min, cfg.alpha_max)
        if callback is not None:
            callback(k, x, g, alpha)
        k += 1

    if gnorm <= cfg.eps:
        rep.termination = "converged"
    rep.x, rep.f = x, fx
    rep.iterations = k - 1
    rep.residual = gnorm
    rep.nfev, rep.ngev = nfev, ngev
    return rep
