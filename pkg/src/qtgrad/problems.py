"""Test-problem generators, LIBSVM ingestion and the SVM dual QP."""

from dataclasses import dataclass, field
import json
import math
from typing import Optional

import numpy as np

from .config import Objective
from .linops import DenseOperator, DiagonalOperator, as_operator
from .projgrad import BoxConstraint, SLBConstraint, constraint_from_json
from .quadsolver import QuadraticProblem

# 1-based index bands (first, last) as fractions of n, and their value ranges;
# "k" stands for kappa
_BANDS = {
    1: [((2, None), (1.0, "k"))],
    2: [((2, 1 / 5), (1.0, 100.0)), ((1 / 5, None), ("k/2", "k"))],
    3: [((2, 1 / 2), (1.0, 100.0)), ((1 / 2, None), ("k/2", "k"))],
    4: [((2, 4 / 5), (1.0, 100.0)), ((4 / 5, None), ("k/2", "k"))],
    5: [((2, 1 / 5), (1.0, 100.0)), ((1 / 5, 4 / 5), (100.0, "k/2")), ((4 / 5, None), ("k/2", "k"))],
}


@dataclass(frozen=True)
class SpectrumSpec:
    set_id: int
    n: int
    kappa: float

    def __post_init__(self):
        if self.set_id not in _BANDS:
            raise ValueError(f"set_id must be in 1..5, got {self.set_id}")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.set_id > 1 and self.kappa <= 200:
            raise ValueError("sets 2-5 need kappa > 200 so the bands are ordered")
        if self.kappa <= 1:
            raise ValueError("kappa must exceed 1")


def spectrum(spec, rng):
    """Diagonal ``v`` with ``v_1 = 1``, ``v_n = kappa`` and banded interior."""
    n, k = spec.n, spec.kappa

    def val(t):
        return {"k": k, "k/2": k / 2}.get(t, t)

    v = np.empty(n)
    v[0], v[-1] = 1.0, k
    for (first, last), (lo, hi) in _BANDS[spec.set_id]:
        # band covers 1-based indices start..stop
        start = first if isinstance(first, int) else int(n * first) + 1
        stop = n - 1 if last is None else int(n * last)
        if stop >= start:
            v[start - 1:stop] = rng.uniform(val(lo), val(hi), stop - start + 1)
    return v


def gen_random_quadratic(spec, seed=0):
    """``f(x) = (x - x*)' diag(v) (x - x*)`` with ``x0 = 0``.

    There is no 1/2 factor in ``f``: the Hessian is ``2 diag(v)`` and the
    returned problem stores ``A = 2 diag(v)``, ``b = 2 diag(v) x*`` and the
    constant ``x*' diag(v) x*`` so its value matches ``f`` exactly.
    """
    rng = np.random.default_rng(seed)
    v = spectrum(spec, rng)
    x_star = rng.uniform(-10.0, 10.0, spec.n)
    return QuadraticProblem(
        A=DiagonalOperator(2.0 * v), b=2.0 * v * x_star, x0=np.zeros(spec.n),
        offset=float(x_star @ (v * x_star)), x_star=x_star,
        name=f"randquad-s{spec.set_id}-n{spec.n}-k{spec.kappa:g}-{seed}",
    )


def diagonal_hard_entries(n, kappa):
    """``A_jj = 10**(log10(kappa) (n - j) / (n - 1))`` for ``j = 1..n``."""
    j = np.arange(1, n + 1)
    return 10.0 ** (math.log10(kappa) * (n - j) / (n - 1))


def gen_diagonal_hard(n, kappa, seed=0):
    """Diagonal quadratic with log-uniform spectrum from kappa down to 1, ``b = 0``.

    The start has entries uniform in ``[-10, 10]``.
    """
    if n < 2 or not kappa > 1:
        raise ValueError("need n >= 2 and kappa > 1")
    rng = np.random.default_rng(seed)
    return QuadraticProblem(
        A=DiagonalOperator(diagonal_hard_entries(n, kappa)), b=np.zeros(n),
        x0=rng.uniform(-10.0, 10.0, n), x_star=np.zeros(n),
        name=f"diaghard-n{n}-k{kappa:g}-{seed}",
    )


def gen_2d_termination_case(lam, seed=0):
    """``A = diag(1, lam)``, ``b = 0`` and a start uniform in ``[-10, 10]^2``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    rng = np.random.default_rng(seed)
    return QuadraticProblem(
        A=DiagonalOperator([1.0, float(lam)]), b=np.zeros(2),
        x0=rng.uniform(-10.0, 10.0, 2), x_star=np.zeros(2),
        name=f"twodim-l{lam:g}-{seed}",
    )


@dataclass
class ConstrainedQP:
    """``min 1/2 x'Ax - c'x`` over a box or SLB set."""

    A: object
    c: np.ndarray
    constraint: object
    x0: np.ndarray
    x_star: Optional[np.ndarray] = None
    name: str = "cqp"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = as_operator(self.A)
        self.c = np.asarray(self.c, dtype=np.float64)
        self.x0 = np.asarray(self.x0, dtype=np.float64)

    @property
    def n(self):
        return self.A.n

    def value(self, x):
        return 0.5 * float(x @ self.A.matvec(x)) - float(self.c @ x)

    def grad(self, x):
        return self.A.matvec(x) - self.c

    def objective(self):
        return Objective(self.value, self.grad, self.n, self.name)


@dataclass(frozen=True)
class SLBGenSpec:
    n: int
    ncond: float = 4.0
    ndeg: float = 1.0
    na_xstar: int = 0
    na_x1: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not (0 <= self.na_xstar <= self.n and 0 <= self.na_x1 <= self.n):
            raise ValueError("active counts must lie in [0, n]")
        if self.na_xstar == self.n:
            raise ValueError("at least one free variable is needed at x*")


def _householder_product(ps, M):
    # apply (I - 2 p3 p3')(I - 2 p2 p2')(I - 2 p1 p1') to the rows of M
    for p in ps:
        M = M - 2.0 * np.outer(p, p @ M)
    return M


def _householder_hessian(n, ncond, rng):
    ps = []
    for _ in range(3):
        p = rng.uniform(-1.0, 1.0, n)
        ps.append(p / np.linalg.norm(p))
    d = 10.0 ** (np.arange(n) / (n - 1) * ncond)
    P = _householder_product(ps, np.eye(n))
    A = (P * d) @ P.T
    return 0.5 * (A + A.T)


def gen_random_box(spec, seed=0):
    """Random box-constrained quadratic on ``[-1, 1]^n`` with a planted solution.

    Same Hessian and multiplier construction as :func:`gen_random_slb`
    without the linear equality. Returns ``(ConstrainedQP, x_star)``.
    """
    n = spec.n
    rng = np.random.default_rng(seed)
    A = _householder_hessian(n, spec.ncond, rng)
    x_star = rng.uniform(-1.0, 1.0, n)
    act = rng.choice(n, spec.na_xstar, replace=False)
    at_upper = rng.random(spec.na_xstar) < 0.5
    x_star[act] = np.where(at_upper, 1.0, -1.0)
    mult = 10.0 ** (-spec.ndeg * rng.random(spec.na_xstar))
    # grad = A x - c must equal +mult at lower and -mult at upper bounds
    c = A @ x_star - np.bincount(act, np.where(at_upper, -mult, mult), minlength=n)
    box = BoxConstraint(-np.ones(n), np.ones(n))
    x1 = rng.uniform(-1.0, 1.0, n)
    act1 = rng.choice(n, spec.na_x1, replace=False)
    x1[act1] = np.where(rng.random(spec.na_x1) < 0.5, 1.0, -1.0)
    qp = ConstrainedQP(DenseOperator(A, check_symmetric=False), c, box, x1, x_star,
                       name=f"box-n{n}-c{spec.ncond:g}-d{spec.ndeg:g}-{seed}")
    return qp, x_star


def gen_random_slb(spec, seed=0):
    """Random SLB quadratic with a planted solution.

    ``A = P D P'`` with ``P`` a product of three Householder reflectors and
    ``log10 d_i = (i - 1)/(n - 1) * ncond``. Bounds are ``[-1, 1]``.
    ``x*`` has ``na_xstar`` components at bounds; the linear term is chosen
    so that ``x*`` satisfies the KKT conditions with bound multipliers
    ``10**(-ndeg * u)``, ``u ~ U(0, 1)``. The start has ``na_x1``
    components at bounds before being projected.

    Returns
    -------
    (ConstrainedQP, x_star)
    """
    n = spec.n
    rng = np.random.default_rng(seed)
    A = _householder_hessian(n, spec.ncond, rng)
    l, u = -np.ones(n), np.ones(n)

    x_star = rng.uniform(-1.0, 1.0, n)
    act = rng.choice(n, spec.na_xstar, replace=False)
    at_upper = rng.random(spec.na_xstar) < 0.5
    x_star[act] = np.where(at_upper, 1.0, -1.0)
    a = rng.uniform(-1.0, 1.0, n)
    b = float(a @ x_star)
    t = float(rng.uniform(-1.0, 1.0))
    mult = 10.0 ** (-spec.ndeg * rng.random(spec.na_xstar))
    delta, zeta = np.zeros(n), np.zeros(n)
    delta[act[~at_upper]] = mult[~at_upper]
    zeta[act[at_upper]] = mult[at_upper]
    c = A @ x_star - delta + zeta - t * a

    cons = SLBConstraint(BoxConstraint(l, u), a, b)
    x1 = rng.uniform(-1.0, 1.0, n)
    act1 = rng.choice(n, spec.na_x1, replace=False)
    x1[act1] = np.where(rng.random(spec.na_x1) < 0.5, 1.0, -1.0)
    x1 = cons.project(x1)
    qp = ConstrainedQP(DenseOperator(A, check_symmetric=False), c, cons, x1, x_star,
                       name=f"slb-n{n}-c{spec.ncond:g}-d{spec.ndeg:g}-{seed}",
                       info={"t": t, "delta": delta, "zeta": zeta})
    return qp, x_star


@dataclass
class SVMDataset:
    """Feature rows ``Z`` (``n x m``) with labels ``w`` in ``{+1, -1}``."""

    Z: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=np.float64))
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.Z.shape[0] != self.w.size:
            raise ValueError("one label per example is required")
        if not np.all(np.isin(self.w, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")

    @property
    def m(self):
        return self.Z.shape[1]

    @property
    def examples(self):
        return list(zip(self.Z, self.w))

    def subset(self, idx):
        return SVMDataset(self.Z[idx], self.w[idx])


def load_libsvm(path, n_features=None):
    """Parse ``label idx:val ...`` lines with 1-based feature indices."""
    rows, labels = [], []
    width = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
                feats = {}
                for tok in parts[1:]:
                    i, v = tok.split(":")
                    i = int(i)
                    if i < 1:
                        raise ValueError("feature indices are 1-based")
                    feats[i] = float(v)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed line ({exc})") from None
            if label not in (1.0, -1.0):
                raise ValueError(f"{path}:{lineno}: label {parts[0]} is not +1/-1")
            labels.append(label)
            rows.append(feats)
            if feats:
                width = max(width, max(feats))
    m = width if n_features is None else n_features
    if width > m:
        raise ValueError(f"feature index {width} exceeds n_features={m}")
    Z = np.zeros((len(rows), m))
    for r, feats in enumerate(rows):
        for i, v in feats.items():
            Z[r, i - 1] = v
    return SVMDataset(Z.reshape(len(rows), m), np.array(labels))


def save_libsvm(data, path):
    with open(path, "w") as fh:
        for z, w in zip(data.Z, data.w):
            feats = " ".join(f"{i + 1}:{float(z[i])!r}" for i in np.flatnonzero(z))
            fh.write(f"{int(w):+d} {feats}".rstrip() + "\n")


def gaussian_kernel_matrix(Z, sigma):
    sq = np.sum(Z * Z, axis=1)
    D = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (Z @ Z.T), 0.0)
    np.fill_diagonal(D, 0.0)
    return np.exp(-D / (2.0 * sigma * sigma))


def build_svm_dual(data, C=1.0, sigma_kernel=math.sqrt(10.0)):
    """SVM dual ``min 1/2 x'Gx - e'x`` s.t. ``0 <= x <= C``, ``w'x = 0``.

    ``G_ij = w_i w_j exp(-||z_i - z_j||^2 / (2 sigma^2))``; the start is the
    null vector.
    """
    if not (C > 0 and sigma_kernel > 0):
        raise ValueError("C and sigma_kernel must be positive")
    n = data.w.size
    K = gaussian_kernel_matrix(data.Z, sigma_kernel)
    G = data.w[:, None] * K * data.w[None, :]
    G = 0.5 * (G + G.T)
    cons = SLBConstraint(BoxConstraint(np.zeros(n), np.full(n, float(C))), data.w.copy(), 0.0)
    return ConstrainedQP(DenseOperator(G, check_symmetric=False), np.ones(n), cons,
                         np.zeros(n), name=f"svm-n{n}-C{C:g}")


def make_two_gaussians(n=200, m=10, sep=1.0, seed=0):
    """Two overlapping Gaussian clouds in ``R^m`` with labels ``+1``/``-1``.

    Class means are ``+-sep/2`` along every axis and covariances are unit.
    """
    rng = np.random.default_rng(seed)
    w = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    Z = rng.standard_normal((n, m)) + 0.5 * sep * w[:, None]
    return SVMDataset(Z, w)


def problem_to_json(p):
    """Serialize a diagonal or dense quadratic problem."""
    A = p.A
    if isinstance(A, DiagonalOperator):
        Aenc = {"diag": A.d.tolist()}
    elif isinstance(A, DenseOperator):
        Aenc = {"dense": A.M.tolist()}
    else:
        raise TypeError(f"cannot serialize operator {type(A).__name__}")
    out = {"name": p.name, "A": Aenc, "x0": p.x0.tolist(),
           "x_star": None if p.x_star is None else np.asarray(p.x_star).tolist()}
    if isinstance(p, ConstrainedQP):
        out.update(kind="cqp", c=p.c.tolist(), constraint=p.constraint.to_dict())
    else:
        out.update(kind="quad", b=p.b.tolist(), offset=p.offset)
    return json.dumps(out)


def problem_from_json(text):
    d = json.loads(text)
    A = DiagonalOperator(d["A"]["diag"]) if "diag" in d["A"] else DenseOperator(d["A"]["dense"])
    x_star = None if d["x_star"] is None else np.array(d["x_star"])
    if d["kind"] == "cqp":
        return ConstrainedQP(A, np.array(d["c"]), constraint_from_json(d["constraint"]),
                             np.array(d["x0"]), x_star, d["name"])
    return QuadraticProblem(A, np.array(d["b"]), np.array(d["x0"]), d["offset"], x_star, d["name"])
