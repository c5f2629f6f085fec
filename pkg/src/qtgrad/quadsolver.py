"""Gradient methods for strictly convex quadratics ``1/2 x'Ax - b'x``.

No line search is used: the iteration is ``x_{k+1} = x_k - alpha_k g_k``
with ``alpha_1`` the exact line-search step and ``alpha_2`` the BB1 step.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import Objective, SolveReport, SolverConfig
from .errors import NotPositiveDefiniteError
from .linops import as_operator
from .stepsize import BBPair, BBState, TauController, alpha_new, sd_exact, select_step


@dataclass
class QuadraticProblem:
    A: object
    b: np.ndarray
    x0: np.ndarray
    offset: float = 0.0
    x_star: Optional[np.ndarray] = None
    name: str = "quadratic"

    def __post_init__(self):
        self.A = as_operator(self.A)
        self.b = np.asarray(self.b, dtype=np.float64)
        self.x0 = np.asarray(self.x0, dtype=np.float64)
        if self.b.shape != (self.A.n,) or self.x0.shape != (self.A.n,):
            raise ValueError("A, b and x0 dimensions disagree")

    @property
    def n(self):
        return self.A.n

    def value(self, x):
        return 0.5 * float(x @ self.A.matvec(x)) - float(self.b @ x) + self.offset

    def grad(self, x):
        return self.A.matvec(x) - self.b

    def objective(self):
        return Objective(self.value, self.grad, self.n, self.name)

    def looks_spd(self, n_probe=8, rng=0):
        """Probabilistic SPD check via Rayleigh quotients on random vectors."""
        rng = np.random.default_rng(rng)
        for _ in range(n_probe):
            v = rng.standard_normal(self.n)
            if v @ self.A.matvec(v) <= 1e-14 * (v @ v):
                return False
        return True


def termination_check(g, g1_norm, eps):
    """True when ``||g||_2 <= eps * g1_norm``."""
    return float(np.linalg.norm(g)) <= eps * g1_norm


def _run(p, choose, eps, max_iter, trace=None, stop_after=None):
    A = p.A
    x = p.x0.copy()
    g = p.grad(x)
    g1 = float(np.linalg.norm(g))
    hist = [g1]
    steps, branches = [], []
    if g1 == 0.0:
        return SolveReport(x, p.value(x), 0, "converged", 0.0, ngev=1,
                           grad_norm_history=hist)
    alpha = sd_exact(g, A)
    prev = None
    state = {}
    k = 1
    termination = "max_iter"
    branch = "sd"
    while True:
        steps.append(alpha)
        branches.append(branch)
        x_new = x - alpha * g
        g_new = p.grad(x_new)
        s = x_new - x
        y = g_new - g
        x, g = x_new, g_new
        gn = float(np.linalg.norm(g))
        hist.append(gn)
        if trace is not None:
            trace({"k": k, "grad_norm": gn, "alpha": alpha, "branch": branch})
        k += 1
        if gn <= eps * g1:
            termination = "converged"
            break
        if (stop_after is not None and k > stop_after) or k > max_iter:
            break
        sy = float(s @ y)
        if sy <= 0:
            raise NotPositiveDefiniteError(f"s.y = {sy} <= 0 at iteration {k}; A is not SPD")
        pair = BBPair(float(s @ s) / sy, sy / float(y @ y))
        alpha, branch = choose(k, prev, pair, state)
        prev = pair
    return SolveReport(
        x=x, f=p.value(x), iterations=k - 1, termination=termination,
        residual=hist[-1] / g1, ngev=k, grad_norm_history=hist,
        stepsize_trace=steps, branches=branches,
    )


def solve_quadratic(p, cfg=None, trace: Optional[Callable] = None):
    """Adaptive method: long BB1 steps, short steps from the new stepsize.

    For ``k >= 3`` the stepsize comes from :func:`~qtgrad.stepsize.select_step`
    with a dynamic threshold (``cfg.scheme == "dynamic"``) or a fixed one
    (``"fixed"``). Stops when ``||g_k|| <= cfg.eps * ||g_1||``.
    """
    cfg = cfg or SolverConfig()
    gamma = 1.0 if cfg.scheme == "fixed" else cfg.gamma

    def choose(k, prev, pair, state):
        if k == 2:
            state["tau"] = TauController(cfg.tau1, gamma)
            return pair.bb1, "bb1"
        if cfg.scheme == "bb1":
            return pair.bb1, "bb1"
        an = alpha_new(BBState(prev, pair))
        alpha, state["tau"], short = select_step(BBState(prev, pair), an, state["tau"])
        return alpha, "short" if short else "long"

    return _run(p, choose, cfg.eps, cfg.max_iter, trace)


def solve_bb1(p, cfg=None, trace=None):
    """Original BB method with the long stepsize."""
    cfg = cfg or SolverConfig()
    return _run(p, lambda k, prev, pair, st: (pair.bb1, "bb1"), cfg.eps, cfg.max_iter, trace)


def solve_abb(p, tau_fixed=0.15, cfg=None, trace=None):
    """Adaptive BB: BB2 when ``bb2/bb1 < tau_fixed``, else BB1."""
    if not 0 < tau_fixed <= 1:
        raise ValueError("tau_fixed must lie in (0, 1]")
    cfg = cfg or SolverConfig()

    def choose(k, prev, pair, state):
        if k > 2 and pair.bb2 / pair.bb1 < tau_fixed:
            return pair.bb2, "bb2"
        return pair.bb1, "bb1"

    return _run(p, choose, cfg.eps, cfg.max_iter, trace)


def solve_bb_new_once(p, variant="bb1", new_at=3, n_iter=5):
    """BB1 or BB2 iteration with ``alpha_{new_at}`` replaced by the new stepsize.

    Runs exactly ``n_iter`` iterations (fewer if the gradient vanishes) and
    returns the report; ``report.x`` is ``x_{n_iter+1}``. ``new_at=None``
    gives the unmodified method.
    """
    if variant not in ("bb1", "bb2"):
        raise ValueError("variant must be 'bb1' or 'bb2'")

    def choose(k, prev, pair, state):
        base = pair.bb1 if variant == "bb1" else pair.bb2
        if new_at is not None and k == new_at:
            an = alpha_new(BBState(prev, pair))
            if an is not None:
                return an, "new"
        return base, variant

    return _run(p, choose, 0.0, n_iter, stop_after=n_iter)
