"""Smallest eigenpairs of an SPD operator from an unconstrained penalty model.

Minimizers of

    P_mu(X) = 1/4 ||X'X||_F^2 + 1/2 tr(X'(A - mu I)X),   X in R^{n x r},

span the invariant subspace of the ``r`` smallest eigenvalues of ``A`` when
``mu`` exceeds the r-th eigenvalue. The solver runs a gradient method with
trace-ratio BB stepsizes and a best/worst reference line search, then
extracts eigenpairs with Rayleigh-Ritz.
"""

from dataclasses import dataclass, field, replace
import json
import math
import time
from typing import Optional

import numpy as np

from .config import SolverConfig
from .errors import LineSearchError, UndefinedStepsizeError
from .linesearch import DFReference, backtrack, df_update
from .linops import as_operator
from .stepsize import BBPair, TauController, adaptive_next, clamp

MU_FACTOR = 1.01


@dataclass(frozen=True)
class PenaltyModel:
    A: object
    mu: float
    r: int

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.r < 1:
            raise ValueError("block size r must be >= 1")


def _check_block(m, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape != (m.A.n, m.r):
        raise ValueError(f"expected a block of shape {(m.A.n, m.r)}, got {X.shape}")
    return X


def _value_from(m, X, AX):
    XtX = X.T @ X
    return 0.25 * float(np.sum(XtX * XtX)) + 0.5 * (float(np.sum(X * AX)) - m.mu * float(np.sum(X * X)))


def _grad_from(m, X, AX):
    return X @ (X.T @ X) + AX - m.mu * X


def p_mu_value(m, X):
    """``1/4 ||X'X||_F^2 + 1/2 tr(X'(A - mu I)X)``."""
    X = _check_block(m, X)
    return _value_from(m, X, m.A.matmat(X))


def p_mu_grad(m, X):
    """``X(X'X) + (A - mu I)X``."""
    X = _check_block(m, X)
    return _grad_from(m, X, m.A.matmat(X))


def mbb_stepsizes(S, Y):
    """Trace-ratio BB pair ``(tr(S'S)/tr(S'Y), tr(S'Y)/tr(Y'Y))``."""
    S = np.asarray(S, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if S.shape != Y.shape:
        raise ValueError("S and Y must have the same shape")
    sy = float(np.vdot(S, Y))
    yy = float(np.vdot(Y, Y))
    if sy == 0.0 or yy == 0.0:
        raise UndefinedStepsizeError("tr(S'Y) = 0 or Y = 0")
    return BBPair(float(np.vdot(S, S)) / sy, sy / yy)


def r_bar(r):
    """Index of the Ritz value used for mu: ``max(floor(1.1 r), 10)``."""
    return max(int(math.floor(1.1 * r)), 10)


@dataclass(frozen=True)
class MuSchedule:
    j: int = 1
    j_max: int = 3
    g1_norm: float = float("nan")
    r_bar: int = 10

    def __post_init__(self):
        if not 1 <= self.j <= self.j_max + 1:
            raise ValueError(f"stage counter j={self.j} outside [1, {self.j_max + 1}]")


def ritz_values(A, X):
    """Eigenvalues of ``A`` projected on ``span(X)``, ascending."""
    Q, R = np.linalg.qr(X)
    d = np.abs(np.diag(R))
    if d.size and d.min() <= 1e-12 * max(1.0, d.max()):
        raise ValueError("block is rank deficient")
    H = Q.T @ A.matmat(Q)
    return np.linalg.eigvalsh(0.5 * (H + H.T))


def _mu_from(A, X, rb):
    vals = ritz_values(A, X)
    # the projected matrix has only r eigenvalues
    idx = min(rb, vals.size) - 1
    return MU_FACTOR * float(vals[idx])


def mu_init(A, X1, r, j_max=3):
    """Initial penalty shift and schedule.

    Returns ``(mu, sched)`` with ``mu = 1.01 * theta_q`` where ``theta_q`` is
    the ``q = min(r_bar(r), r)``-th smallest Ritz value of ``A`` on
    ``span(X1)``.
    """
    A = as_operator(A)
    X1 = np.asarray(X1, dtype=np.float64)
    if X1.ndim != 2 or X1.shape[1] != r:
        raise ValueError("X1 must have r columns")
    rb = r_bar(r)
    mu = _mu_from(A, X1, rb)
    return mu, MuSchedule(j=1, j_max=j_max, r_bar=rb)


def mu_update(sched, mu, A, Xk, grad_norm):
    """Recompute mu when ``grad_norm <= 0.1**j * g1_norm`` and ``j <= j_max``.

    Returns ``(mu, sched)``; ``sched.j`` is incremented after an update.
    """
    if sched.j <= sched.j_max and grad_norm <= 0.1**sched.j * sched.g1_norm:
        return _mu_from(as_operator(A), Xk, sched.r_bar), replace(sched, j=sched.j + 1)
    return mu, sched


def rayleigh_ritz(A, X):
    """Orthonormalize ``X`` and rotate it onto Ritz vectors.

    Returns ``(values, vectors)`` with values ascending and orthonormal
    vector columns.
    """
    Q, _ = np.linalg.qr(X)
    H = Q.T @ A.matmat(Q)
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    U = Q @ V
    # a second pass keeps the columns orthonormal to machine precision
    U, R = np.linalg.qr(U)
    U *= np.sign(np.diag(R))
    return w, U


@dataclass
class EigReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    resi: float
    err: Optional[float]
    iterations: int
    nfe: int
    termination: str = "converged"
    mu: float = float("nan")
    grad_norm: float = float("nan")
    wall_time: float = 0.0
    grad_norm_history: list = field(default_factory=list)
    stepsize_trace: list = field(default_factory=list)
    mu_history: list = field(default_factory=list)
    # unnormalized final iterate, before Rayleigh-Ritz
    X_final: Optional[np.ndarray] = None
    # (f_ref, lam, gd, f_new) per accepted step
    line_search: list = field(default_factory=list)

    @property
    def converged(self):
        return self.termination == "converged"

    def to_json(self):
        return json.dumps({
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "err": self.err, "resi": self.resi,
            "iter": self.iterations, "nfe": self.nfe,
            "termination": self.termination, "time": self.wall_time,
        })


def eig_metrics(A, eigenvalues_true, report):
    """Mean relative eigenvalue error and mean scaled residual.

    ``err_i = |lam_bar_i - lam_i| / max(1, |lam_i|)`` and
    ``resi_i = ||A u_i - lam_bar_i u_i||_2 / max(1, |lam_bar_i|)``.
    ``err`` is ``None`` when ``eigenvalues_true`` is ``None``.
    """
    A = as_operator(A)
    lam = np.asarray(report.eigenvalues, dtype=np.float64)
    U = np.asarray(report.eigenvectors, dtype=np.float64)
    R = A.matmat(U) - U * lam
    resi = float(np.mean(np.linalg.norm(R, axis=0) / np.maximum(1.0, np.abs(lam))))
    err = None
    if eigenvalues_true is not None:
        t = np.asarray(eigenvalues_true, dtype=np.float64)[: lam.size]
        err = float(np.mean(np.abs(lam - t) / np.maximum(1.0, np.abs(t))))
    return err, resi


def initial_block(n, r, seed=0):
    """Seeded Gaussian ``n x r`` block with orthonormal columns."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return Q


def solve_eigen(A, r, cfg=None, X1=None, eigenvalues_true=None):
    """Approximate the ``r`` smallest eigenpairs of an SPD operator.

    Parameters
    ----------
    A : LinearOperator or array_like
        Symmetric positive definite.
    r : int
        Number of eigenpairs, ``1 <= r <= n``.
    cfg : SolverConfig, optional
        Defaults to ``SolverConfig(eps=1e-3)``; ``eps`` bounds
        ``||grad P_mu||_F``, ``M`` is the reference patience and ``j_max``
        caps the number of mu updates.
    X1 : ndarray, optional
        Starting block; by default an orthonormalized Gaussian block drawn
        with ``cfg.seed``.
    eigenvalues_true : array_like, optional
        Reference eigenvalues for the ``err`` metric.

    Returns
    -------
    EigReport
    """
    t0 = time.perf_counter()
    A = as_operator(A)
    if not 1 <= r <= A.n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={A.n}")
    cfg = cfg or SolverConfig(eps=1e-3)
    X = initial_block(A.n, r, cfg.seed) if X1 is None else np.array(X1, dtype=np.float64)
    if X.shape != (A.n, r):
        raise ValueError(f"X1 must have shape {(A.n, r)}")

    mu, sched = mu_init(A, X, r, cfg.j_max)
    model = PenaltyModel(A, mu, r)
    AX = A.matmat(X)
    f = _value_from(model, X, AX)
    G = _grad_from(model, X, AX)
    nfe = 1
    gnorm = float(np.linalg.norm(G))
    sched = replace(sched, g1_norm=gnorm)
    rep = EigReport(np.empty(0), np.empty((A.n, 0)), float("nan"), None, 0, 0)
    rep.grad_norm_history.append(gnorm)
    rep.mu_history.append(mu)

    ref = DFReference.start(f, cfg.M)
    alpha = clamp(1.0 / gnorm, cfg.alpha_min, cfg.alpha_max) if gnorm > 0 else 1.0
    tau = TauController(cfg.tau1, 1.0 if cfg.scheme == "fixed" else cfg.gamma)
    # scheme "bb1" never takes the short branch
    use_short = cfg.scheme != "bb1"
    prev = None
    cache = {}

    def fun(Xt):
        AXt = A.matmat(Xt)
        cache["X"], cache["AX"] = Xt, AXt
        return _value_from(model, Xt, AXt)

    k = 1
    termination = "max_iter"
    while gnorm > cfg.eps:
        if k > cfg.max_iter:
            break
        ref = df_update(ref, f)
        D = -G
        gd = -gnorm * gnorm
        try:
            lam, f_new, X_new, evals = backtrack(fun, X, D, alpha, ref.f_r, gd, cfg.sigma, cfg.delta)
        except LineSearchError:
            termination = "line_search_failed"
            break
        if not np.isfinite(f_new):
            raise FloatingPointError("non-finite penalty value")
        nfe += evals
        rep.line_search.append((ref.f_r, lam, gd, float(f_new)))
        rep.stepsize_trace.append(alpha)
        AX = cache["AX"]
        G_new = _grad_from(model, X_new, AX)
        S = X_new - X
        Y = G_new - G
        X, G, f = X_new, G_new, float(f_new)
        gnorm = float(np.linalg.norm(G))

        sy = float(np.vdot(S, Y))
        if sy > 0:
            pair = mbb_stepsizes(S, Y)
            alpha, tau, _ = adaptive_next(prev if use_short else None, pair, tau)
            prev = pair
        else:
            # |MBB1|; undefined only when tr(S'Y) is exactly zero
            alpha = abs(float(np.vdot(S, S)) / sy) if sy != 0 else 1.0 / max(gnorm, 1e-300)
            prev = None
        alpha = clamp(alpha, cfg.alpha_min, cfg.alpha_max)

        mu_new, sched = mu_update(sched, model.mu, A, X, gnorm)
        if mu_new != model.mu:
            model = PenaltyModel(A, mu_new, r)
            f = _value_from(model, X, AX)
            G = _grad_from(model, X, AX)
            gnorm = float(np.linalg.norm(G))
            ref = DFReference.start(f, cfg.M)
            rep.mu_history.append(mu_new)
        rep.grad_norm_history.append(gnorm)
        k += 1

    if gnorm <= cfg.eps:
        termination = "converged"
    vals, vecs = rayleigh_ritz(A, X)
    rep.eigenvalues, rep.eigenvectors = vals, vecs
    rep.iterations = k - 1
    rep.nfe = nfe
    rep.termination = termination
    rep.mu = model.mu
    rep.grad_norm = gnorm
    rep.err, rep.resi = eig_metrics(A, eigenvalues_true, rep)
    rep.wall_time = time.perf_counter() - t0
    rep.X_final = X
    return rep
