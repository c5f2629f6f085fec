"""Gradient stepsize formulas and the adaptive long/short selector.

The central routine is :func:`alpha_new`, a short stepsize built only from
the BB1/BB2 stepsizes of two consecutive iterations. Plugged once into a
BB iteration on a two-variable strictly convex quadratic it drives the
gradient to zero within three more steps.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple, Optional

import numpy as np

from .errors import NotPositiveDefiniteError, UndefinedStepsizeError

# relative guards for alpha_new: discriminant noise near a double root, and
# the equal-BB1 degenerate case
DISC_TOL = 1e-14
BB1_EQ_TOL = 1e-14


class BBPair(NamedTuple):
    bb1: float
    bb2: float


class BBState(NamedTuple):
    """BB pairs from the previous and the current iteration."""

    prev: Optional[BBPair]
    curr: BBPair


@dataclass(frozen=True)
class TauController:
    """Threshold on ``bb2 / bb1`` deciding between long and short steps."""

    tau: float = 0.2
    gamma: float = 1.02

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.gamma >= 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")

    def shrink(self):
        return TauController(self.tau / self.gamma, self.gamma)

    def grow(self):
        return TauController(self.tau * self.gamma, self.gamma)


def bb1(s, y):
    """Long BB stepsize ``s.s / s.y``; negative when ``s.y < 0``."""
    sy = float(np.vdot(s, y))
    if sy == 0.0:
        raise UndefinedStepsizeError("s.y = 0 in BB1")
    return float(np.vdot(s, s)) / sy


def bb2(s, y):
    """Short BB stepsize ``s.y / y.y``."""
    yy = float(np.vdot(y, y))
    if yy == 0.0:
        raise UndefinedStepsizeError("y = 0 in BB2")
    return float(np.vdot(s, y)) / yy


def bb_pair(s, y):
    return BBPair(bb1(s, y), bb2(s, y))


def sd_exact(g, A):
    """Exact line-search stepsize ``g.g / g.Ag`` for a quadratic with Hessian ``A``."""
    gAg = float(g @ A.matvec(g))
    if gAg <= 0:
        raise NotPositiveDefiniteError(f"g.Ag = {gAg} <= 0")
    return float(g @ g) / gAg


def dy_stepsize(sd_prev, sd_curr, g_prev_norm, g_curr_norm):
    """Dai-Yuan stepsize from two consecutive exact-line-search stepsizes."""
    if not (sd_prev > 0 and sd_curr > 0 and g_prev_norm > 0 and g_curr_norm >= 0):
        raise ValueError("dy_stepsize needs positive stepsizes and gradient norms")
    ip, ic = 1.0 / sd_prev, 1.0 / sd_curr
    rad = math.sqrt((ip - ic) ** 2 + 4.0 * g_curr_norm**2 / (sd_prev * g_prev_norm) ** 2)
    return 2.0 / (ip + ic + rad)


def alpha_new_ratios(prev, curr):
    """Coefficient ratios ``(phi1/phi3, phi2/phi3)`` of the stepsize quadratic.

    Returns ``None`` when the two BB1 values coincide or a BB2 is zero.
    """
    d1 = prev.bb1 - curr.bb1
    if abs(d1) <= BB1_EQ_TOL * max(abs(prev.bb1), abs(curr.bb1)) or prev.bb2 == 0 or curr.bb2 == 0:
        return None
    r1 = (prev.bb2 - curr.bb2) / (prev.bb2 * curr.bb2 * d1)
    # same value as (bb1p*bb2p - bb1c*bb2c) / (bb2p*bb2c*d1) without the
    # cancellation in the numerator
    r2 = 1.0 / curr.bb2 + r1 * curr.bb1
    return r1, r2


def alpha_new(state):
    """Smaller root of ``r1*a^2 - r2*a + 1 = 0`` built from two BB pairs.

    Parameters
    ----------
    state : BBState
        ``prev`` holds the BB pair of iteration k-1 and ``curr`` that of
        iteration k.

    Returns
    -------
    float or None
        ``None`` when the stepsize is undefined: equal BB1 values, a
        negative discriminant, or a nonpositive denominator.
    """
    if state.prev is None:
        return None
    ratios = alpha_new_ratios(state.prev, state.curr)
    if ratios is None:
        return None
    r1, r2 = ratios
    bb1c, bb2c = state.curr
    if r1 >= 0:
        # expanded form is a sum of nonnegative terms when bb1c >= bb2c > 0
        disc = (1.0 / bb2c - r1 * bb1c) ** 2 + 4.0 * r1 * (bb1c / bb2c - 1.0)
    else:
        disc = r2 * r2 - 4.0 * r1
    if disc < 0:
        if disc < -DISC_TOL * max(1.0, r2 * r2):
            return None
        disc = 0.0
    root = math.sqrt(disc)
    if r2 >= 0:
        den = r2 + root
        if den <= 0:
            return None
        return 2.0 / den
    if r1 >= 0:
        return None
    # same root as 2 / (r2 + root) without cancelling r2 against root
    return (r2 - root) / (2.0 * r1)


def select_step(state, alpha_new_val, tau):
    """Adaptive rule returning ``(alpha, tau_next, short_branch)``."""
    curr = state.curr
    if curr.bb2 / curr.bb1 < tau.tau:
        prev = state.prev if state.prev is not None else curr
        cands = [prev.bb2, curr.bb2]
        if alpha_new_val is not None and alpha_new_val > 0:
            cands.append(alpha_new_val)
        return min(cands), tau.shrink(), True
    return curr.bb1, tau.grow(), False


def adaptive_select(state, alpha_new_val, tau):
    """Choose the next stepsize from the adaptive long/short rule.

    Short branch (``bb2/bb1 < tau``): the smallest of the two most recent
    BB2 values and ``alpha_new_val`` (skipped when undefined or
    nonpositive), with tau divided by gamma. Otherwise BB1 with tau
    multiplied by gamma.

    Returns ``(alpha, tau_next)``.
    """
    alpha, tau_next, _ = select_step(state, alpha_new_val, tau)
    return alpha, tau_next


def adaptive_next(prev, curr, tau):
    """Stepsize after a step whose curvature test passed.

    ``prev`` is the BB pair of the step before, or ``None`` when that step
    failed its curvature test (or does not exist); the short branch then is
    unavailable and the long step is taken. Returns
    ``(alpha, tau_next, short_branch)``.
    """
    if prev is None:
        return curr.bb1, tau.grow(), False
    state = BBState(prev, curr)
    return select_step(state, alpha_new(state), tau)


def fallback_step(x, r):
    """``min(1/||r||_inf, ||x||_inf/||r||_inf)`` used after a failed curvature test."""
    rn = float(np.max(np.abs(r)))
    if rn == 0.0:
        return 1.0
    return min(1.0, float(np.max(np.abs(x)))) / rn


def clamp(alpha, lo, hi):
    return max(lo, min(alpha, hi))
