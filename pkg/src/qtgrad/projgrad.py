"""Projected gradient method for box and singly linearly box-constrained sets.

The stepsize is the adaptive long/short rule applied to BB stepsizes in
which the gradient difference ``y`` is replaced by a Lagrangian gradient
difference ``ybar``: zero on the estimated active set and, for a linear
equality ``a'x = b``, deflated along ``a`` on the inactive set.
"""

from dataclasses import dataclass
import json

import numpy as np

from . import kernels
from .config import SolveReport, SolverConfig
from .errors import InfeasibleConstraintError, LineSearchError
from .linesearch import GLLMemory, backtrack
from .stepsize import BBPair, TauController, adaptive_next, clamp, fallback_step
from .uncsolver import initial_stepsize


@dataclass(frozen=True)
class BoxConstraint:
    """``l <= x <= u``; infinite bounds are allowed."""

    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        l = np.asarray(self.l, dtype=np.float64)
        u = np.asarray(self.u, dtype=np.float64)
        if l.shape != u.shape or l.ndim != 1:
            raise ValueError("l and u must be vectors of equal length")
        if np.any(np.isnan(l)) or np.any(np.isnan(u)) or np.any(l > u):
            raise ValueError("need l <= u componentwise")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "u", u)

    @classmethod
    def unbounded(cls, n):
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def n(self):
        return self.l.size

    def project(self, x):
        return np.minimum(np.maximum(x, self.l), self.u)

    def is_feasible(self, x, tol=0.0):
        return bool(np.all(x >= self.l - tol) and np.all(x <= self.u + tol))

    def to_dict(self):
        return {"type": "box", "l": _enc(self.l), "u": _enc(self.u)}


@dataclass(frozen=True)
class SLBConstraint:
    """``l <= x <= u`` and ``a'x = b``."""

    box: BoxConstraint
    a: np.ndarray
    b: float
    tol: float = 1e-12

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.shape != self.box.l.shape:
            raise ValueError("a must match the box dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))
        lo, hi = kernels.slb_feasible_range(self.box.l, self.box.u, a)
        slack = 1e-12 * max(1.0, abs(self.b))
        if not lo - slack <= self.b <= hi + slack:
            raise InfeasibleConstraintError(f"b = {self.b} outside [{lo}, {hi}]")

    @property
    def n(self):
        return self.a.size

    def project(self, x):
        z, _ = kernels.slb_project(x, self.box.l, self.box.u, self.a, self.b, self.tol)
        return z

    def is_feasible(self, x, tol=1e-8):
        return self.box.is_feasible(x, tol) and abs(self.a @ x - self.b) <= tol * max(1.0, abs(self.b))

    def to_dict(self):
        return {"type": "slb", "l": _enc(self.box.l), "u": _enc(self.box.u),
                "a": self.a.tolist(), "b": self.b}


def _enc(v):
    # JSON has no infinities; encode them as strings
    return [float(t) if np.isfinite(t) else ("inf" if t > 0 else "-inf") for t in v]


def _dec(v):
    return np.array([float(t) for t in v], dtype=np.float64)


def constraint_to_json(c):
    return json.dumps(c.to_dict())


def constraint_from_json(text):
    d = json.loads(text) if isinstance(text, str) else text
    if d.get("type") not in ("box", "slb"):
        raise ValueError(f"unknown constraint type {d.get('type')!r}")
    box = BoxConstraint(_dec(d["l"]), _dec(d["u"]))
    if d["type"] == "box":
        return box
    return SLBConstraint(box, _dec(d["a"]), float(d["b"]))


def project_box(x, c):
    """Componentwise clamp onto ``[l, u]``."""
    return c.project(np.asarray(x, dtype=np.float64))


def project_slb(x, c, tol=None):
    """Euclidean projection onto ``{l <= z <= u, a'z = b}``.

    The linear-constraint multiplier ``t`` is the root of the nonincreasing
    piecewise-linear function ``a' clip(x - t a, l, u) - b``, found by
    bracketing and safeguarded secant/Newton steps.
    """
    x = np.asarray(x, dtype=np.float64)
    z, _ = kernels.slb_project(x, c.box.l, c.box.u, c.a, c.b, c.tol if tol is None else tol)
    return z


def project(x, c):
    """Projection onto a box or SLB set; ``c=None`` is the identity."""
    if c is None:
        return np.array(x, dtype=np.float64)
    return c.project(np.asarray(x, dtype=np.float64))


def search_direction(x, g, alpha, c):
    """``d = P(x - alpha g) - x``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return project(x - alpha * g, c) - x


def stationarity_residual(x, g, c):
    """``||P(x - g) - x||_inf``."""
    return float(np.max(np.abs(project(x - g, c) - x)))


def ybar_box(y, s):
    """``y`` with components zeroed where ``s`` is zero."""
    return kernels.ybar(y, np.asarray(s) == 0)


def ybar_slb(y, s, a):
    """``y`` zeroed where ``s`` is zero and deflated along ``a`` elsewhere.

    On the inactive set ``I`` the result is
    ``y_I - (a_I.y_I / a_I.a_I) a_I``; with ``a_I = 0`` this reduces to
    :func:`ybar_box`.
    """
    return kernels.ybar(y, np.asarray(s) == 0, a)


def active_set(s, x_new=None, x_old=None, c=None, rule="zero_step"):
    """Boolean mask of the estimated active set.

    ``"zero_step"`` flags ``s_i == 0``. ``"bounds"`` flags components that
    sit at the same bound in both iterates.
    """
    if rule == "zero_step":
        return np.asarray(s) == 0
    if rule == "bounds":
        box = c.box if isinstance(c, SLBConstraint) else c
        return ((x_new == x_old) & ((x_new == box.l) | (x_new == box.u)))
    raise ValueError(f"unknown active-set rule {rule!r}")


def solve_projected(f, c, x0, cfg=None, callback=None):
    """Minimize ``f`` over a box or SLB set by projected gradient steps.

    Parameters
    ----------
    f : Objective
    c : BoxConstraint or SLBConstraint
    x0 : array_like
        Projected onto the feasible set before the first iteration.
    cfg : SolverConfig, optional
        ``stop_rule="residual"`` stops at ``||P(x - g) - x||_inf <= eps``;
        ``"step"`` stops at ``||x_k - x_{k-1}||_2 <= eps``.
        ``slb_active_rule`` picks the active-set estimate for SLB sets.

    Returns
    -------
    SolveReport
        ``residual`` is the final projected-gradient residual;
        ``info["step_norm"]`` the last step length.
    """
    cfg = cfg or SolverConfig()
    is_slb = isinstance(c, SLBConstraint)
    rule = cfg.slb_active_rule if is_slb else "zero_step"
    x = project(x0, c)
    fx = float(f.fun(x))
    g = np.asarray(f.grad(x), dtype=np.float64)
    nfev = ngev = 1
    mem = GLLMemory(cfg.M)
    mem.push(fx)
    rep = SolveReport(x=x, f=fx, iterations=0, termination="max_iter", residual=0.0)
    rep.f_history.append(fx)

    pres = project(x - g, c) - x
    res = float(np.max(np.abs(pres)))
    rep.grad_norm_history.append(res)
    step_norm = np.inf
    if res == 0.0 or (cfg.stop_rule == "residual" and res <= cfg.eps):
        rep.termination = "converged"
        rep.residual = res
        rep.nfev, rep.ngev = nfev, ngev
        return rep

    alpha = clamp(initial_stepsize(x, pres), cfg.alpha_min, cfg.alpha_max)
    tau = TauController(cfg.tau1, 1.0 if cfg.scheme == "fixed" else cfg.gamma)
    # scheme "bb1" never takes the short branch
    use_short = cfg.scheme != "bb1"
    prev = None
    k = 1
    while True:
        if k > cfg.max_iter:
            break
        d = search_direction(x, g, alpha, c)
        gd = float(g @ d)
        if not gd < 0:
            # d vanishes (or is numerically flat) only at a stationary point
            rep.termination = "converged" if not np.any(d) else "stalled"
            break
        f_r = mem.f_ref
        try:
            lam, f_new, x_new, evals = backtrack(f.fun, x, d, 1.0, f_r, gd, cfg.sigma, cfg.delta)
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
        act = active_set(s, x_new, x, c, rule)
        yb = kernels.ybar(y, act, c.a if is_slb else None)
        x_old = x
        x, g, fx = x_new, g_new, float(f_new)
        mem.push(fx)
        rep.f_history.append(fx)
        pres = project(x - g, c) - x
        res = float(np.max(np.abs(pres)))
        rep.grad_norm_history.append(res)
        step_norm = float(np.linalg.norm(x - x_old))

        sy = float(s @ yb)
        if sy > 0:
            pair = BBPair(float(s @ s) / sy, sy / float(yb @ yb))
            alpha, tau, short = adaptive_next(prev if use_short else None, pair, tau)
            rep.branches.append("short" if short else "long")
            prev = pair
        else:
            alpha = fallback_step(x, pres)
            rep.branches.append("fallback")
            prev = None
        alpha = clamp(alpha, cfg.alpha_min, cfg.alpha_max)
        if callback is not None:
            callback(k, x, g, alpha)
        k += 1
        if res == 0.0:
            rep.termination = "converged"
            break
        done = res <= cfg.eps if cfg.stop_rule == "residual" else step_norm <= cfg.eps
        if done:
            rep.termination = "converged"
            break

    rep.x, rep.f = x, fx
    rep.iterations = k - 1
    rep.residual = res
    rep.nfev, rep.ngev = nfev, ngev
    rep.info["step_norm"] = step_norm
    return rep
