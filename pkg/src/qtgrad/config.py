"""Solver configuration, objective wrapper and run report."""

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SolverConfig:
    """Tunables shared by all solvers.

    ``eps`` is interpreted by each solver's own stopping rule. ``scheme``
    picks how the long/short threshold evolves: ``"dynamic"`` multiplies or
    divides tau by ``gamma`` every step, ``"fixed"`` keeps ``tau1``, and
    ``"bb1"`` never takes the short branch.
    """

    alpha_min: float = 1e-10
    alpha_max: float = 1e6
    tau1: float = 0.2
    gamma: float = 1.02
    eps: float = 1e-6
    sigma: float = 1e-4
    delta: float = 0.5
    M: int = 10
    max_iter: int = 20000
    seed: int = 0
    scheme: str = "dynamic"
    # projected gradient only
    stop_rule: str = "residual"
    slb_active_rule: str = "zero_step"
    # eigensolver only
    j_max: int = 3

    def __post_init__(self):
        if not 0 < self.alpha_min <= self.alpha_max:
            raise ValueError("need 0 < alpha_min <= alpha_max")
        if not (0 < self.sigma < 1 and 0 < self.delta < 1):
            raise ValueError("sigma and delta must lie in (0, 1)")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.tau1 <= 0:
            raise ValueError("tau1 must be positive")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.scheme not in ("dynamic", "fixed", "bb1"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.stop_rule not in ("residual", "step"):
            raise ValueError(f"unknown stop_rule {self.stop_rule!r}")
        if self.slb_active_rule not in ("zero_step", "bounds"):
            raise ValueError(f"unknown slb_active_rule {self.slb_active_rule!r}")

    @classmethod
    def for_slb(cls, **overrides):
        """Defaults used for singly linearly box-constrained problems."""
        base = dict(tau1=0.5, gamma=1.3, stop_rule="step", max_iter=100000)
        base.update(overrides)
        return cls(**base)

    def with_(self, **overrides):
        return replace(self, **overrides)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class Objective:
    """Smooth objective ``fun`` with gradient ``grad`` on R^n."""

    fun: Callable
    grad: Callable
    n: int
    name: str = "objective"

    def __call__(self, x):
        return self.fun(x)


@dataclass
class SolveReport:
    x: np.ndarray
    f: float
    iterations: int
    termination: str
    residual: float
    nfev: int = 0
    ngev: int = 0
    grad_norm_history: list = field(default_factory=list)
    stepsize_trace: list = field(default_factory=list)
    branches: list = field(default_factory=list)
    f_history: list = field(default_factory=list)
    # (f_ref, lam, gd, f_new) per accepted step
    line_search: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.termination == "converged"

    # QuadSolveReport naming
    @property
    def x_final(self):
        return self.x


def check_gradient(obj, x, h=None, rng=None, n_dirs=3):
    """Largest relative error of ``obj.grad`` against central differences.

    Uses directional derivatives along random unit directions with step
    ``h = 1e-6 * (1 + ||x||)`` unless given.
    """
    rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=np.float64)
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(x))
    g = obj.grad(x)
    worst = 0.0
    for _ in range(n_dirs):
        e = rng.standard_normal(x.shape)
        e /= np.linalg.norm(e)
        fd = (obj.fun(x + h * e) - obj.fun(x - h * e)) / (2 * h)
        an = float(np.vdot(g, e))
        err = abs(fd - an) / max(1.0, abs(an), abs(fd))
        worst = max(worst, err)
    return worst
