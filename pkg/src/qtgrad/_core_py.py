"""Pure-Python (numpy) implementations of the hot kernels.

Every function here has a twin in ``_core.pyx`` with the same signature and
semantics; :mod:`qtgrad.kernels` picks one at import time.
"""

import numpy as np

from .errors import InfeasibleConstraintError


def laplacian_matvec(x, nx, ny, nz):
    """Apply the 7-point negative Laplacian (Dirichlet, unit spacing)."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    r = 1 if squeeze else x.shape[1]
    grid = x.reshape(nz, ny, nx, r)
    naxes = sum(1 for m in (nx, ny, nz) if m > 1) or 1
    out = (2.0 * naxes) * grid
    # axis 0 -> z, 1 -> y, 2 -> x
    for axis, m in ((0, nz), (1, ny), (2, nx)):
        if m < 2:
            continue
        lo = [slice(None)] * 4
        hi = [slice(None)] * 4
        lo[axis] = slice(0, m - 1)
        hi[axis] = slice(1, m)
        out[tuple(lo)] -= grid[tuple(hi)]
        out[tuple(hi)] -= grid[tuple(lo)]
    out = out.reshape(-1, r)
    return out[:, 0].copy() if squeeze else out


def _residual(x, l, u, a, b, t):
    z = np.clip(x - t * a, l, u)
    free = (z > l) & (z < u) & (a != 0.0)
    return float(a @ z) - b, float(a[free] @ a[free]), z


def slb_feasible_range(l, u, a):
    """Smallest and largest value of ``a @ z`` over the box ``l <= z <= u``."""
    lo = np.where(a > 0, l, u)
    hi = np.where(a > 0, u, l)
    nz = a != 0.0
    lo_val = float(np.sum(a[nz] * lo[nz])) if np.any(nz) else 0.0
    hi_val = float(np.sum(a[nz] * hi[nz])) if np.any(nz) else 0.0
    return lo_val, hi_val


def slb_project(x, l, u, a, b, tol=1e-12, max_iter=200):
    """Euclidean projection onto ``{l <= z <= u, a @ z = b}``.

    Solves the monotone piecewise-linear multiplier equation
    ``h(t) = a @ clip(x - t a, l, u) - b = 0`` by bracketing followed by
    safeguarded Newton/secant steps with a bisection fallback.

    Returns
    -------
    z : ndarray
        The projection.
    t : float
        The multiplier of the linear constraint.
    """
    x = np.asarray(x, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    scale = max(1.0, abs(b))
    lo_val, hi_val = slb_feasible_range(l, u, a)
    if lo_val > b + tol * max(scale, abs(lo_val)) or hi_val < b - tol * max(scale, abs(hi_val)):
        raise InfeasibleConstraintError(
            f"a @ z = {b} unreachable over the box (range [{lo_val}, {hi_val}])"
        )

    h, slope, z = _residual(x, l, u, a, b, 0.0)
    if abs(h) <= tol * max(scale, float(np.abs(a) @ np.abs(z))):
        return z, 0.0

    aa = float(a @ a)
    if aa == 0.0:
        return z, 0.0
    # bracket the root; h is nonincreasing in t
    sign = 1.0 if h > 0 else -1.0
    step = abs(h) / (slope if slope > 0 else aa)
    prev_t, prev_h = 0.0, h
    for _ in range(2000):
        t = prev_t + sign * step
        h, slope, z = _residual(x, l, u, a, b, t)
        # also covers b sitting on the edge of the attainable range
        if h * sign <= 0 or abs(h) <= tol * max(scale, float(np.abs(a) @ np.abs(z))):
            break
        prev_t, prev_h = t, h
        step *= 2.0
    else:
        raise InfeasibleConstraintError("failed to bracket the multiplier")
    if abs(h) <= tol * max(scale, float(np.abs(a) @ np.abs(z))):
        return z, t
    if sign > 0:
        t_lo, h_lo, t_hi, h_hi = prev_t, prev_h, t, h
    else:
        t_lo, h_lo, t_hi, h_hi = t, h, prev_t, prev_h

    best_t, best_h = t, h
    width = np.inf
    for _ in range(max_iter):
        if abs(h) <= tol * max(scale, float(np.abs(a) @ np.abs(z))):
            break
        cand = t + h / slope if slope > 0 else np.nan
        if not (t_lo < cand < t_hi):
            cand = t_lo + h_lo * (t_hi - t_lo) / (h_lo - h_hi)
        # bisect when the last step did not halve the bracket, so secant
        # steps cannot stall on a flat piece
        if not (t_lo < cand < t_hi) or t_hi - t_lo > 0.5 * width:
            cand = 0.5 * (t_lo + t_hi)
            if not (t_lo < cand < t_hi):
                break
        width = t_hi - t_lo
        t = cand
        h, slope, z = _residual(x, l, u, a, b, t)
        if abs(h) < abs(best_h):
            best_t, best_h = t, h
        if h > 0:
            t_lo, h_lo = t, h
        elif h < 0:
            t_hi, h_hi = t, h
        else:
            break
    if t != best_t:
        _, _, z = _residual(x, l, u, a, b, best_t)
    return z, best_t


def ybar(y, active, a=None):
    """Deflate a gradient difference on the active set.

    Components flagged ``active`` are zeroed; when ``a`` is given the
    remaining components are additionally made orthogonal to ``a`` on the
    inactive set.
    """
    y = np.asarray(y, dtype=np.float64)
    active = np.asarray(active, dtype=bool)
    out = np.where(active, 0.0, y)
    if a is None:
        return out
    a = np.asarray(a, dtype=np.float64)
    inactive = ~active
    a_in = a[inactive]
    aa = float(a_in @ a_in)
    if aa == 0.0:
        return out
    t_diff = float(a_in @ y[inactive]) / aa
    out[inactive] = y[inactive] - t_diff * a_in
    return out
