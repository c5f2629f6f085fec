# cython: language_level=3
"""Compiled kernels; see ``_core_py.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isnan, INFINITY, NAN

from .errors import InfeasibleConstraintError

cnp.import_array()


def laplacian_matvec(x, Py_ssize_t nx, Py_ssize_t ny, Py_ssize_t nz):
    """Apply the 7-point negative Laplacian (Dirichlet, unit spacing)."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr.reshape(-1, 1)
    cdef double[:, ::1] X = arr
    cdef Py_ssize_t n = X.shape[0], r = X.shape[1]
    out_arr = np.empty((n, r), dtype=np.float64)
    cdef double[:, ::1] Y = out_arr
    cdef int naxes = (nx > 1) + (ny > 1) + (nz > 1)
    if naxes == 0:
        naxes = 1
    cdef double diag = 2.0 * naxes
    cdef Py_ssize_t i, j, k, c, p, sx = 1, sy = nx, sz = nx * ny
    cdef double v
    with nogil:
        for k in range(nz):
            for j in range(ny):
                for i in range(nx):
                    p = i + nx * (j + ny * k)
                    for c in range(r):
                        v = diag * X[p, c]
                        if i > 0:
                            v -= X[p - sx, c]
                        if i < nx - 1:
                            v -= X[p + sx, c]
                        if j > 0:
                            v -= X[p - sy, c]
                        if j < ny - 1:
                            v -= X[p + sy, c]
                        if k > 0:
                            v -= X[p - sz, c]
                        if k < nz - 1:
                            v -= X[p + sz, c]
                        Y[p, c] = v
    if squeeze:
        return out_arr[:, 0].copy()
    return out_arr


cdef inline double _clip(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef void _residual(const double[::1] x, const double[::1] l, const double[::1] u,
                    const double[::1] a, double b, double t,
                    double* h, double* slope, double* mag) nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double z, s = 0.0, sl = 0.0, m = 0.0
    for i in range(n):
        z = _clip(x[i] - t * a[i], l[i], u[i])
        s += a[i] * z
        m += fabs(a[i] * z)
        if a[i] != 0.0 and z > l[i] and z < u[i]:
            sl += a[i] * a[i]
    h[0] = s - b
    slope[0] = sl
    mag[0] = m


def slb_feasible_range(l, u, a):
    """Smallest and largest value of ``a @ z`` over the box ``l <= z <= u``."""
    cdef const double[::1] L = np.ascontiguousarray(l, dtype=np.float64)
    cdef const double[::1] U = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double lo = 0.0, hi = 0.0
    for i in range(A.shape[0]):
        if A[i] > 0:
            lo += A[i] * L[i]
            hi += A[i] * U[i]
        elif A[i] < 0:
            lo += A[i] * U[i]
            hi += A[i] * L[i]
    return lo, hi


def slb_project(x, l, u, a, double b, double tol=1e-12, int max_iter=200):
    """Euclidean projection onto ``{l <= z <= u, a @ z = b}``.

    Returns ``(z, t)`` with ``t`` the multiplier of the linear constraint.
    """
    cdef const double[::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] L = np.ascontiguousarray(l, dtype=np.float64)
    cdef const double[::1] U = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t i, n = X.shape[0]
    cdef double scale = max(1.0, fabs(b))
    lo_val, hi_val = slb_feasible_range(L, U, A)
    if lo_val > b + tol * max(scale, fabs(lo_val)) or hi_val < b - tol * max(scale, fabs(hi_val)):
        raise InfeasibleConstraintError(
            f"a @ z = {b} unreachable over the box (range [{lo_val}, {hi_val}])"
        )

    cdef double h, slope, mag, aa = 0.0, t = 0.0
    cdef double sign, step, prev_t, prev_h
    cdef double t_lo, h_lo, t_hi, h_hi, best_t, best_h, cand, width
    cdef int it
    cdef bint bracketed = False
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] Z = out

    _residual(X, L, U, A, b, 0.0, &h, &slope, &mag)
    for i in range(n):
        aa += A[i] * A[i]
    if fabs(h) <= tol * max(scale, mag) or aa == 0.0:
        for i in range(n):
            Z[i] = _clip(X[i], L[i], U[i])
        return out, 0.0

    sign = 1.0 if h > 0 else -1.0
    step = fabs(h) / (slope if slope > 0 else aa)
    prev_t = 0.0
    prev_h = h
    for it in range(2000):
        t = prev_t + sign * step
        _residual(X, L, U, A, b, t, &h, &slope, &mag)
        # also covers b sitting on the edge of the attainable range
        if h * sign <= 0 or fabs(h) <= tol * max(scale, mag):
            bracketed = True
            break
        prev_t = t
        prev_h = h
        step *= 2.0
    if not bracketed:
        raise InfeasibleConstraintError("failed to bracket the multiplier")

    if fabs(h) > tol * max(scale, mag):
        if sign > 0:
            t_lo, h_lo, t_hi, h_hi = prev_t, prev_h, t, h
        else:
            t_lo, h_lo, t_hi, h_hi = t, h, prev_t, prev_h
        best_t = t
        best_h = h
        width = INFINITY
        for it in range(max_iter):
            if fabs(h) <= tol * max(scale, mag):
                break
            cand = t + h / slope if slope > 0 else NAN
            if isnan(cand) or not (t_lo < cand < t_hi):
                cand = t_lo + h_lo * (t_hi - t_lo) / (h_lo - h_hi)
            # bisect when the last step did not halve the bracket, so secant
            # steps cannot stall on a flat piece
            if isnan(cand) or not (t_lo < cand < t_hi) or t_hi - t_lo > 0.5 * width:
                cand = 0.5 * (t_lo + t_hi)
                if not (t_lo < cand < t_hi):
                    break
            width = t_hi - t_lo
            t = cand
            _residual(X, L, U, A, b, t, &h, &slope, &mag)
            if fabs(h) < fabs(best_h):
                best_t = t
                best_h = h
            if h > 0:
                t_lo = t
                h_lo = h
            elif h < 0:
                t_hi = t
                h_hi = h
            else:
                break
        t = best_t

    for i in range(n):
        Z[i] = _clip(X[i] - t * A[i], L[i], U[i])
    return out, t


def ybar(y, active, a=None):
    """Deflate a gradient difference on the active set."""
    cdef const double[::1] Yv = np.ascontiguousarray(y, dtype=np.float64)
    act_arr = np.ascontiguousarray(active, dtype=np.uint8)
    cdef const unsigned char[::1] act = act_arr
    cdef Py_ssize_t i, n = Yv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] O = out
    cdef const double[::1] Av
    cdef double aa = 0.0, ay = 0.0, t_diff
    for i in range(n):
        O[i] = 0.0 if act[i] else Yv[i]
    if a is None:
        return out
    Av = np.ascontiguousarray(a, dtype=np.float64)
    for i in range(n):
        if not act[i]:
            aa += Av[i] * Av[i]
            ay += Av[i] * Yv[i]
    if aa == 0.0:
        return out
    t_diff = ay / aa
    for i in range(n):
        if not act[i]:
            O[i] = Yv[i] - t_diff * Av[i]
    return out
