"""Classic smooth unconstrained test functions with analytic gradients.

Most entries follow the Moré-Garbow-Hillstrom collection; a few are
separable or quadratic problems common in BB-method studies. Use
:func:`get_function` to build an :class:`~qtgrad.config.Objective` and
its standard starting point.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import Objective


@dataclass(frozen=True)
class RegisteredFunction:
    name: str
    make: Callable  # n -> (fun, grad)
    start: Callable  # n -> x0
    default_n: int
    fixed_n: bool = True
    # dimension must be a multiple of this when variable
    block: int = 1


def _least_squares(res, jac):
    def fun(x):
        r = res(x)
        return float(r @ r)

    def grad(x):
        return 2.0 * (jac(x).T @ res(x))

    return fun, grad


def _rosenbrock(n):
    return _least_squares(
        lambda x: np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]]),
        lambda x: np.array([[-20.0 * x[0], 10.0], [-1.0, 0.0]]),
    )


def _ext_rosenbrock(n):
    def fun(x):
        xo, xe = x[0::2], x[1::2]
        return float(np.sum(100.0 * (xe - xo**2) ** 2 + (1.0 - xo) ** 2))

    def grad(x):
        xo, xe = x[0::2], x[1::2]
        t = xe - xo**2
        g = np.empty_like(x)
        g[0::2] = -400.0 * xo * t - 2.0 * (1.0 - xo)
        g[1::2] = 200.0 * t
        return g

    return fun, grad


_BEALE_Y = np.array([1.5, 2.25, 2.625])
_BEALE_I = np.arange(1, 4)


def _beale_parts(x1, x2):
    # residuals and partials for every (x1, x2) block at once
    p = x2[..., None] ** _BEALE_I
    r = _BEALE_Y - x1[..., None] * (1.0 - p)
    d1 = -(1.0 - p)
    d2 = x1[..., None] * _BEALE_I * x2[..., None] ** (_BEALE_I - 1)
    return r, d1, d2


def _ext_beale(n):
    def fun(x):
        r, _, _ = _beale_parts(x[0::2], x[1::2])
        return float(np.sum(r * r))

    def grad(x):
        r, d1, d2 = _beale_parts(x[0::2], x[1::2])
        g = np.empty_like(x)
        g[0::2] = 2.0 * np.sum(r * d1, axis=-1)
        g[1::2] = 2.0 * np.sum(r * d2, axis=-1)
        return g

    return fun, grad


def _freudenstein_roth(n):
    return _least_squares(
        lambda x: np.array([
            -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1],
            -29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1],
        ]),
        lambda x: np.array([
            [1.0, 10.0 * x[1] - 3.0 * x[1] ** 2 - 2.0],
            [1.0, 3.0 * x[1] ** 2 + 2.0 * x[1] - 14.0],
        ]),
    )


def _helical_valley(n):
    def theta(x):
        t = np.arctan(x[1] / x[0]) / (2 * np.pi) if x[0] != 0 else 0.25 * np.sign(x[1])
        return t + 0.5 if x[0] < 0 else t

    def res(x):
        return np.array([
            10.0 * (x[2] - 10.0 * theta(x)),
            10.0 * (np.hypot(x[0], x[1]) - 1.0),
            x[2],
        ])

    def jac(x):
        rr = x[0] ** 2 + x[1] ** 2
        rho = np.sqrt(rr)
        c = 100.0 / (2 * np.pi * rr)
        return np.array([
            [c * x[1], -c * x[0], 10.0],
            [10.0 * x[0] / rho, 10.0 * x[1] / rho, 0.0],
            [0.0, 0.0, 1.0],
        ])

    return _least_squares(res, jac)


def _wood(n):
    def fun(x):
        x1, x2, x3, x4 = x
        return float(
            100 * (x2 - x1**2) ** 2 + (1 - x1) ** 2 + 90 * (x4 - x3**2) ** 2 + (1 - x3) ** 2
            + 10.1 * ((x2 - 1) ** 2 + (x4 - 1) ** 2) + 19.8 * (x2 - 1) * (x4 - 1)
        )

    def grad(x):
        x1, x2, x3, x4 = x
        return np.array([
            -400 * x1 * (x2 - x1**2) - 2 * (1 - x1),
            200 * (x2 - x1**2) + 20.2 * (x2 - 1) + 19.8 * (x4 - 1),
            -360 * x3 * (x4 - x3**2) - 2 * (1 - x3),
            180 * (x4 - x3**2) + 20.2 * (x4 - 1) + 19.8 * (x2 - 1),
        ])

    return fun, grad


def _powell_singular(n):
    s5, s10 = np.sqrt(5.0), np.sqrt(10.0)

    def parts(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        return a, b, c, d, a + 10 * b, s5 * (c - d), (b - 2 * c) ** 2, s10 * (a - d) ** 2

    def fun(x):
        *_, r1, r2, r3, r4 = parts(x)
        return float(np.sum(r1**2 + r2**2 + r3**2 + r4**2))

    def grad(x):
        a, b, c, d, r1, r2, r3, r4 = parts(x)
        g = np.empty_like(x)
        g[0::4] = 2 * r1 + 2 * r4 * 2 * s10 * (a - d)
        g[1::4] = 20 * r1 + 2 * r3 * 2 * (b - 2 * c)
        g[2::4] = 2 * s5 * r2 - 2 * r3 * 4 * (b - 2 * c)
        g[3::4] = -2 * s5 * r2 - 2 * r4 * 2 * s10 * (a - d)
        return g

    return fun, grad


def _trigonometric(n):
    idx = np.arange(1, n + 1)

    def res(x):
        return n - np.sum(np.cos(x)) + idx * (1 - np.cos(x)) - np.sin(x)

    def fun(x):
        r = res(x)
        return float(r @ r)

    def grad(x):
        r = res(x)
        return 2.0 * (np.sin(x) * np.sum(r) + r * (idx * np.sin(x) - np.cos(x)))

    return fun, grad


def _penalty1(n):
    a = 1e-5

    def fun(x):
        t = x @ x - 0.25
        return float(a * np.sum((x - 1) ** 2) + t * t)

    def grad(x):
        t = x @ x - 0.25
        return 2 * a * (x - 1) + 4 * t * x

    return fun, grad


def _variably_dimensioned(n):
    j = np.arange(1, n + 1)

    def fun(x):
        s = float(j @ (x - 1))
        return float(np.sum((x - 1) ** 2) + s**2 + s**4)

    def grad(x):
        s = float(j @ (x - 1))
        return 2 * (x - 1) + (2 * s + 4 * s**3) * j

    return fun, grad


def _broyden_tridiagonal(n):
    def res(x):
        xp = np.concatenate(([0.0], x, [0.0]))
        return (3 - 2 * x) * x - xp[:-2] - 2 * xp[2:] + 1

    def fun(x):
        r = res(x)
        return float(r @ r)

    def grad(x):
        r = res(x)
        # J^T r with J = tridiag(-1, 3-4x, -2)
        g = (3 - 4 * x) * r
        g[:-1] -= r[1:]
        g[1:] -= 2 * r[:-1]
        return 2 * g

    return fun, grad


def _discrete_bvp(n):
    h = 1.0 / (n + 1)
    t = np.arange(1, n + 1) * h

    def res(x):
        xp = np.concatenate(([0.0], x, [0.0]))
        return 2 * x - xp[:-2] - xp[2:] + 0.5 * h**2 * (x + t + 1) ** 3

    def fun(x):
        r = res(x)
        return float(r @ r)

    def grad(x):
        r = res(x)
        g = (2 + 1.5 * h**2 * (x + t + 1) ** 2) * r
        g[:-1] -= r[1:]
        g[1:] -= r[:-1]
        return 2 * g

    return fun, grad


def _raydan1(n):
    w = np.arange(1, n + 1) / 10.0
    return (lambda x: float(w @ (np.exp(x) - x)), lambda x: w * (np.exp(x) - 1))


def _raydan2(n):
    return (lambda x: float(np.sum(np.exp(x) - x)), lambda x: np.exp(x) - 1)


def _perturbed_quadratic(n):
    i = np.arange(1, n + 1)
    return (
        lambda x: float(i @ x**2 + np.sum(x) ** 2 / 100.0),
        lambda x: 2 * i * x + np.sum(x) / 50.0,
    )


def _tridiagonal_quadratic(n):
    def Tx(x):
        xp = np.concatenate(([0.0], x, [0.0]))
        return 2 * x - xp[:-2] - xp[2:]

    return (lambda x: float(0.5 * x @ Tx(x) - np.sum(x)), lambda x: Tx(x) - 1.0)


def _box3d(n):
    t = 0.1 * np.arange(1, 11)
    c = np.exp(-t) - np.exp(-10 * t)

    def res(x):
        return np.exp(-t * x[0]) - np.exp(-t * x[1]) - x[2] * c

    def jac(x):
        return np.column_stack([-t * np.exp(-t * x[0]), t * np.exp(-t * x[1]), -c])

    return _least_squares(res, jac)


def _sphere(n):
    return (lambda x: float(0.5 * x @ x), lambda x: x.copy())


def _bvp_start(n):
    t = np.arange(1, n + 1) / (n + 1)
    return t * (t - 1)


def _alternating(n, a, b):
    x = np.empty(n)
    x[0::2], x[1::2] = a, b
    return x


REGISTRY = {f.name: f for f in [
    RegisteredFunction("rosenbrock", _rosenbrock, lambda n: np.array([-1.2, 1.0]), 2),
    RegisteredFunction("ext_rosenbrock", _ext_rosenbrock, lambda n: _alternating(n, -1.2, 1.0), 100, False, 2),
    RegisteredFunction("beale", _ext_beale, lambda n: np.ones(2), 2),
    RegisteredFunction("ext_beale", _ext_beale, lambda n: np.ones(n), 50, False, 2),
    RegisteredFunction("freudenstein_roth", _freudenstein_roth, lambda n: np.array([0.5, -2.0]), 2),
    RegisteredFunction("helical_valley", _helical_valley, lambda n: np.array([-1.0, 0.0, 0.0]), 3),
    RegisteredFunction("wood", _wood, lambda n: np.array([-3.0, -1.0, -3.0, -1.0]), 4),
    RegisteredFunction("powell_singular", _powell_singular, lambda n: np.array([3.0, -1.0, 0.0, 1.0]), 4),
    RegisteredFunction("ext_powell_singular", _powell_singular,
                 lambda n: np.tile([3.0, -1.0, 0.0, 1.0], n // 4), 100, False, 4),
    RegisteredFunction("trigonometric", _trigonometric, lambda n: np.full(n, 1.0 / n), 50, False),
    RegisteredFunction("penalty1", _penalty1, lambda n: np.arange(1.0, n + 1), 10, False),
    RegisteredFunction("variably_dimensioned", _variably_dimensioned,
                 lambda n: 1.0 - np.arange(1, n + 1) / n, 10, False),
    RegisteredFunction("broyden_tridiagonal", _broyden_tridiagonal, lambda n: -np.ones(n), 50, False),
    RegisteredFunction("discrete_bvp", _discrete_bvp,
                 lambda n: _bvp_start(n), 20, False),
    RegisteredFunction("raydan1", _raydan1, lambda n: np.ones(n), 50, False),
    RegisteredFunction("raydan2", _raydan2, lambda n: np.arange(1.0, n + 1) / n, 50, False),
    RegisteredFunction("perturbed_quadratic", _perturbed_quadratic, lambda n: np.full(n, 0.5), 50, False),
    RegisteredFunction("tridiagonal_quadratic", _tridiagonal_quadratic, lambda n: np.zeros(n), 50, False),
    RegisteredFunction("box3d", _box3d, lambda n: np.array([0.0, 10.0, 20.0]), 3),
    RegisteredFunction("sphere", _sphere, lambda n: np.ones(n), 10, False),
]}


def list_functions():
    return sorted(REGISTRY)


def get_function(name, n: Optional[int] = None):
    """Return ``(objective, x0)`` for a registered test function.

    Parameters
    ----------
    name : str
        Registry key, see :func:`list_functions`.
    n : int, optional
        Dimension for variable-size functions; defaults to the standard
        size. Fixed-size functions reject any other value.
    """
    try:
        tf = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; choose from {list_functions()}") from None
    if n is None:
        n = tf.default_n
    if tf.fixed_n and n != tf.default_n:
        raise ValueError(f"{name} has fixed dimension {tf.default_n}")
    if n < 1 or n % tf.block:
        raise ValueError(f"{name} needs a dimension that is a positive multiple of {tf.block}")
    fun, grad = tf.make(n)
    x0 = np.asarray(tf.start(n), dtype=np.float64)
    return Objective(fun, grad, n, name), x0
