"""Nonmonotone acceptance tests and the backtracking loop."""

from collections import deque
from dataclasses import dataclass, replace

from .errors import LineSearchError

MAX_BACKTRACKS = 60


class GLLMemory:
    """Sliding window of the last ``M`` objective values.

    The reference value is the window maximum; the current iterate's value
    is part of the window.
    """

    def __init__(self, M):
        if M < 1:
            raise ValueError("M must be >= 1")
        self.M = M
        self.window = deque(maxlen=M)

    def push(self, f):
        self.window.append(float(f))

    @property
    def f_ref(self):
        return max(self.window)


def gll_accepts(f_trial, f_r, lam, gd, sigma):
    """Nonmonotone Armijo test ``f_trial <= f_r + sigma * lam * gd``."""
    return f_trial <= f_r + sigma * lam * gd


def backtrack(fun, x, d, alpha0, f_r, gd, sigma=1e-4, delta=0.5,
              max_backtracks=MAX_BACKTRACKS):
    """Shrink ``lam = alpha0 * delta**j`` until the nonmonotone test holds.

    Parameters
    ----------
    fun : callable
        Objective.
    x, d : ndarray
        Current point and search direction.
    alpha0 : float
        First trial step.
    f_r : float
        Reference value.
    gd : float
        Directional derivative ``g.d``; must be negative.

    Returns
    -------
    lam, f_new, x_new, evals
    """
    if not gd < 0:
        raise ValueError(f"not a descent direction (g.d = {gd})")
    lam = alpha0
    for j in range(max_backtracks + 1):
        x_new = x + lam * d
        f_new = fun(x_new)
        if gll_accepts(f_new, f_r, lam, gd, sigma):
            return lam, f_new, x_new, j + 1
        lam *= delta
    raise LineSearchError(
        f"no acceptable step after {max_backtracks} reductions (alpha0={alpha0})"
    )


@dataclass(frozen=True)
class DFReference:
    """Reference-value tracker with best, worst-since-best and patience."""

    f_best: float
    f_c: float
    m: int
    M: int
    f_r: float

    @classmethod
    def start(cls, f1, M):
        return cls(f_best=f1, f_c=f1, m=0, M=M, f_r=f1)


def df_update(ref, f_curr):
    """Return the tracker after observing ``f_curr``."""
    if f_curr < ref.f_best:
        return replace(ref, f_best=f_curr, f_c=f_curr, m=0)
    f_c = max(ref.f_c, f_curr)
    m = ref.m + 1
    if m == ref.M:
        return replace(ref, f_r=f_c, f_c=f_curr, m=0)
    return replace(ref, f_c=f_c, m=m)
