"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
are produced; they are also repeated in the terminal summary.
"""

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from oracles import box_qp_oracle, slb_kkt_violation, slb_projection_oracle, slb_qp_oracle
from qtgrad import kernels
from qtgrad.config import SolverConfig
from qtgrad.eigsolver import PenaltyModel, mbb_stepsizes, p_mu_grad, p_mu_value, solve_eigen
from qtgrad.linesearch import gll_accepts
from qtgrad.linops import DenseOperator, LaplacianOperator
from qtgrad.problems import (SLBGenSpec, build_svm_dual, gen_2d_termination_case,
                             gen_diagonal_hard, gen_random_box, gen_random_slb,
                             make_two_gaussians)
from qtgrad.projgrad import (BoxConstraint, SLBConstraint, project_slb, solve_projected,
                             stationarity_residual)
from qtgrad.quadsolver import solve_abb, solve_bb1, solve_bb_new_once, solve_quadratic
from qtgrad.stepsize import BBPair, BBState, alpha_new, bb_pair, dy_stepsize
from qtgrad.testfuncs import get_function, list_functions
from qtgrad.uncsolver import solve_unconstrained


def report(num, label, ok, detail):
    ok = bool(ok)
    ACCEPTANCE_LINES.append((num, label, ok, detail))
    print(f"\n[{'PASS' if ok else 'FAIL'}] {num:2d}. {label}: {detail}")
    assert ok, f"criterion {num} ({label}) failed: {detail}"


class TestTwoDimensionalTermination:
    """Criterion 1: one new stepsize makes BB exact on 2-D quadratics."""

    def test_criterion_01(self):
        t0 = time.perf_counter()
        worst = {"bb1+new": [0.0, 0.0], "bb2+new": [0.0, 0.0]}
        plain_min = math.inf
        for lam in (10, 100, 1000, 10000):
            acc = {k: [[], []] for k in ("bb1+new", "bb2+new", "bb1")}
            for seed in range(10):
                p = gen_2d_termination_case(lam, seed=seed)
                for key, variant, at in (("bb1+new", "bb1", 3), ("bb2+new", "bb2", 3),
                                         ("bb1", "bb1", None)):
                    r = solve_bb_new_once(p, variant, new_at=at, n_iter=5)
                    acc[key][0].append(r.grad_norm_history[-1])
                    acc[key][1].append(p.value(r.x))
            for key in worst:
                worst[key][0] = max(worst[key][0], float(np.mean(acc[key][0])))
                worst[key][1] = max(worst[key][1], float(np.mean(acc[key][1])))
            plain_min = min(plain_min, float(np.mean(acc["bb1"][0])))
        elapsed = time.perf_counter() - t0
        ok = (all(g <= 1e-10 and f <= 1e-20 for g, f in worst.values())
              and plain_min > 1e-2 and elapsed < 1.0)
        detail = (f"max avg ||g6|| bb1+new {worst['bb1+new'][0]:.1e}, bb2+new "
                  f"{worst['bb2+new'][0]:.1e}; max avg f(x6) {max(worst['bb1+new'][1], worst['bb2+new'][1]):.1e}; "
                  f"min avg plain BB1 ||g6|| {plain_min:.1e}; {elapsed:.2f}s")
        report(1, "2-D quadratic termination", ok, detail)


def _ratios_reference(prev, curr):
    # coefficient ratios written directly from their defining quotients
    den = prev.bb2 * curr.bb2 * (prev.bb1 - curr.bb1)
    r1 = (prev.bb2 - curr.bb2) / den
    r2 = (prev.bb1 * prev.bb2 - curr.bb1 * curr.bb2) / den
    return r1, r2


class TestStepsizeBounds:
    """Criterion 2: sandwich bounds and root properties of alpha_new."""

    def test_criterion_02(self):
        rng = np.random.default_rng(2024)
        slack = 1e-12
        fails = {"undefined": 0, "lower": 0, "upper": 0, "root": 0, "residual": 0}
        upper_neg_r2, n_neg, worst_res = 0, 0, 0.0
        for _ in range(10000):
            b1 = 10.0 ** rng.uniform(-3, 3, 2)
            b2 = b1 * 10.0 ** rng.uniform(-3, 0, 2)
            if abs(b1[0] - b1[1]) <= 1e-6 * max(b1):
                b1[1] *= 1.5
            prev, curr = BBPair(b1[0], b2[0]), BBPair(b1[1], b2[1])
            a = alpha_new(BBState(prev, curr))
            r1, r2 = _ratios_reference(prev, curr)
            if a is None or not a > 0:
                fails["undefined"] += 1
                continue
            lo_b2, hi_b2 = min(prev.bb2, curr.bb2), max(prev.bb2, curr.bb2)
            if r1 >= 0:
                lower = 1.0 / r2 * (1 - slack) <= a
                upper = a <= lo_b2 * (1 + slack)
            else:
                n_neg += 1
                lower = hi_b2 * (1 - slack) <= a
                upper = a <= abs(1.0 / r2) * (1 + slack)
                upper_neg_r2 += (not upper) and r2 < 0
            fails["lower"] += not lower
            fails["upper"] += not upper
            # the other root of r1 a^2 - r2 a + 1: larger when r1 > 0,
            # negative when r1 < 0
            other = 1.0 / (r1 * a)
            fails["root"] += not (other >= a * (1 - slack) if r1 > 0 else other < 0)
            scale = max(abs(r1) * a * a, abs(r2) * a, 1.0)
            res = abs(r1 * a * a - r2 * a + 1.0) / scale
            worst_res = max(worst_res, res)
            fails["residual"] += int(res > 1e-10)
        ok = not any(fails.values())
        detail = (f"violations {fails} over 10000 states ({n_neg} with phi1/phi3 < 0; "
                  f"{upper_neg_r2} upper-bound violations all have phi2/phi3 < 0); "
                  f"max rel. residual {worst_res:.1e}")
        report(2, "alpha_new bounds", ok, detail)


def _sd_run(A_diag, x, iters):
    """Exact-line-search gradient descent on ``1/2 x'Ax``; yields gradients and stepsizes."""
    g = A_diag * x
    gs, sds = [g], []
    for _ in range(iters):
        a = float(g @ g) / float(g @ (A_diag * g))
        x = x - a * g
        g = A_diag * x
        gs.append(g)
        sds.append(a)
    return gs, sds


class TestSpectralLimit:
    """Criterion 3: alpha_new along steepest descent tends to 1/lambda_max."""

    def test_criterion_03(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(3)
        lam = np.concatenate(([1.0], np.sort(rng.uniform(1.0, 100.0, 98)), [100.0]))
        x0 = rng.uniform(-10.0, 10.0, 100)
        gs, sds = _sd_run(lam, x0, 500)
        # s_k = -alpha_k g_k and y_k = A s_k; pair j is built from step j - 1
        pairs = [bb_pair(-a * g, -a * lam * g) for a, g in zip(sds, gs[:-1])]
        a500 = alpha_new(BBState(pairs[-2], pairs[-1]))
        dev = abs(a500 * lam[-1] - 1.0)
        elapsed = time.perf_counter() - t0
        report(3, "spectral limit", dev <= 0.01 and elapsed < 1.0,
               f"|alpha_500 * lambda_n - 1| = {dev:.2e}; {elapsed:.2f}s")


class TestDYRecovery:
    """Criterion 4: the DY stepsize solves the 2-D quadratic relation along SD."""

    def test_criterion_04(self):
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(100):
            th = rng.uniform(0, np.pi)
            Q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
            A = (Q * np.array([1.0, 10.0 ** rng.uniform(0.5, 3)])) @ Q.T
            x = rng.uniform(-10, 10, 2)
            k = int(rng.integers(2, 15))
            g_prev = g = A @ x
            for _ in range(k):
                g_prev = g
                sd = float(g @ g) / float(g @ A @ g)
                x = x - sd * g
                g = A @ x
            # recompute both exact stepsizes at the pair (g_{k-1}, g_k)
            gp, gc = g_prev, g
            sdp = float(gp @ gp) / float(gp @ A @ gp)
            sdc = float(gc @ gc) / float(gc @ A @ gc)
            a = dy_stepsize(sdp, sdc, np.linalg.norm(gp), np.linalg.norm(gc))
            z0p, z1p = gp @ gp, gp @ A @ gp
            z0c, z1c = gc @ gc, gc @ A @ gc
            lhs = (z0p - a * z1p) * (z0c - a * z1c)
            rhs = (gp @ gc - a * (gp @ A @ gc)) ** 2
            scale = z0p * z0c + a * (z0p * z1c + z1p * z0c) + a * a * z1p * z1c
            worst = max(worst, abs(lhs - rhs) / scale)
        report(4, "DY recovery", worst <= 1e-10,
               f"max relative residual over 100 runs {worst:.1e}")


class TestQuadraticDominance:
    """Criterion 5: adaptive method beats BB1 and keeps pace with ABB."""

    def test_criterion_05(self):
        cfg = SolverConfig(eps=1e-9)
        ok, parts = True, []
        for kappa in (1e4, 1e5):
            tot = {"new": 0, "bb1": 0, "abb": 0}
            for seed in range(10):
                p = gen_diagonal_hard(500, kappa, seed=seed)
                for key, r in (("new", solve_quadratic(p, cfg)), ("bb1", solve_bb1(p, cfg)),
                               ("abb", solve_abb(p, 0.15, cfg))):
                    assert r.converged, f"{key} did not converge on {p.name}"
                    tot[key] += r.iterations
            ok = ok and tot["new"] < tot["bb1"] and tot["new"] <= 1.1 * tot["abb"]
            parts.append(f"kappa={kappa:g}: new {tot['new']}, bb1 {tot['bb1']}, abb {tot['abb']}")
        report(5, "quadratic dominance", ok, "; ".join(parts))


class TestUnconstrained:
    """Criterion 6: registry convergence with replayable nonmonotone steps."""

    def test_criterion_06(self):
        cfg = SolverConfig(eps=1e-6)
        solved, failed, replay_bad = 0, [], 0
        for name in list_functions():
            f, x0 = get_function(name)
            xs = [np.array(x0, dtype=float)]
            r = solve_unconstrained(f, x0, cfg, callback=lambda k, x, g, a: xs.append(x.copy()))
            if r.converged and r.residual <= 1e-6:
                solved += 1
            else:
                failed.append(name)
            fh = r.f_history
            for k, (f_ref, lam, gd, f_new) in enumerate(r.line_search):
                window = fh[max(0, k - cfg.M + 1): k + 1]
                x = xs[k]
                g = f.grad(x)
                trial = f.fun(x - lam * g)
                good = (f_ref == max(window) and math.isclose(gd, -float(g @ g), rel_tol=1e-12)
                        and trial == f_new and gll_accepts(trial, max(window), lam, gd, cfg.sigma))
                replay_bad += not good
        ok = solved >= 18 and replay_bad == 0
        detail = f"{solved}/20 converged; {replay_bad} accepted steps failed replay"
        if failed:
            detail += f"; not converged: {', '.join(failed)}"
        report(6, "unconstrained registry", ok, detail)


class TestEigensolver:
    """Criterion 7: five smallest Laplacian eigenpairs."""

    def test_criterion_07(self):
        t0 = time.perf_counter()
        A = LaplacianOperator(8, 8, 8)
        rep = solve_eigen(A, 5, SolverConfig(eps=1e-3), eigenvalues_true=A.eigenvalues())
        elapsed = time.perf_counter() - t0
        ok = rep.err <= 1e-6 and rep.resi <= 1e-3 and elapsed < 30
        report(7, "eigensolver", ok,
               f"err {rep.err:.1e}, resi {rep.resi:.1e}, {rep.iterations} iterations, {elapsed:.2f}s")


def random_slb_instance(rng, n):
    l = -rng.uniform(0.1, 2.0, n)
    u = rng.uniform(0.1, 2.0, n)
    l[rng.random(n) < 0.1] = -np.inf
    u[rng.random(n) < 0.1] = np.inf
    a = rng.standard_normal(n)
    a[rng.random(n) < 0.15] = 0.0
    if not np.any(a):
        a[0] = 1.0
    z0 = np.clip(rng.standard_normal(n), l, u)
    # some instances put b on the edge of the attainable range
    if rng.random() < 0.05 and np.all(np.isfinite(np.where(a > 0, l, u)[a != 0])):
        z0 = np.where(a > 0, l, np.where(a < 0, u, z0))
    x = 3.0 * rng.standard_normal(n)
    return x, l, u, a, float(a @ z0)


class TestProjectionOracle:
    """Criterion 8: SLB projection equals exhaustive enumeration."""

    def test_criterion_08(self):
        rng = np.random.default_rng(8)
        worst = 0.0
        with np.errstate(invalid="ignore"):
            for _ in range(1000):
                n = int(rng.integers(1, 9))
                x, l, u, a, b = random_slb_instance(rng, n)
                c = SLBConstraint(BoxConstraint(l, u), a, b)
                worst = max(worst, float(np.max(np.abs(project_slb(x, c)
                                                       - slb_projection_oracle(x, l, u, a, b)))))
        report(8, "SLB projection oracle", worst <= 1e-8,
               f"max |z - z_oracle| over 1000 instances {worst:.1e} (backend {kernels.BACKEND})")


class TestProjectedSolver:
    """Criterion 9: box QPs against enumeration, SLB QPs against planted solutions."""

    def test_criterion_09(self):
        rng = np.random.default_rng(9)
        good, total, oracle_gap = 0, 0, 0.0
        cfg_box = SolverConfig(eps=1e-9)
        for i in range(100):
            n = int(rng.integers(2, 9))
            na = int(rng.integers(0, n))
            qp, x_star = gen_random_box(SLBGenSpec(n, ncond=2, ndeg=1, na_xstar=na,
                                                   na_x1=int(rng.integers(0, n + 1))), seed=i)
            A = qp.A.to_dense()
            box = qp.constraint
            xo = box_qp_oracle(A, qp.c, box.l, box.u)
            oracle_gap = max(oracle_gap, float(np.max(np.abs(xo - x_star))))
            r = solve_projected(qp.objective(), box, qp.x0, cfg_box)
            res = stationarity_residual(r.x, qp.grad(r.x), box)
            good += res <= 1e-6 and np.max(np.abs(r.x - xo)) <= 1e-5
            total += 1
        n_box = good
        cfg_slb = SolverConfig.for_slb(eps=1e-10)
        for i in range(100):
            qp, x_star = gen_random_slb(SLBGenSpec(50, ncond=3, ndeg=1, na_xstar=10, na_x1=10),
                                        seed=i)
            r = solve_projected(qp.objective(), qp.constraint, qp.x0, cfg_slb)
            res = stationarity_residual(r.x, qp.grad(r.x), qp.constraint)
            good += res <= 1e-6 and np.max(np.abs(r.x - x_star)) <= 1e-5
            total += 1
        frac = good / total
        ok = frac >= 0.95 and oracle_gap <= 1e-8
        report(9, "projected solver", ok,
               f"{good}/{total} within tolerance (box {n_box}/100, SLB {good - n_box}/100); "
               f"box oracle vs planted {oracle_gap:.1e}")


class TestSVMDual:
    """Criterion 10: SVM dual by projected gradient."""

    def test_criterion_10(self):
        data = make_two_gaussians(200, seed=0)
        qp = build_svm_dual(data, C=1.0, sigma_kernel=math.sqrt(10.0))
        cons = qp.constraint
        cfg = SolverConfig.for_slb(eps=1e-6)
        infeasible = []

        def check(k, x, g, alpha):
            if np.any(x < 0.0) or np.any(x > 1.0) or abs(float(cons.a @ x)) > 1e-8:
                infeasible.append(k)

        r = solve_projected(qp.objective(), cons, qp.x0, cfg, callback=check)
        step = r.info["step_norm"]

        sub = build_svm_dual(data.subset(np.arange(50)), C=1.0, sigma_kernel=math.sqrt(10.0))
        rs = solve_projected(sub.objective(), sub.constraint, sub.x0, cfg)
        G = sub.A.to_dense()
        sc = sub.constraint
        xo = slb_qp_oracle(G, sub.c, sc.box.l, sc.box.u, sc.a, sc.b)
        kkt = slb_kkt_violation(G, sub.c, sc.box.l, sc.box.u, sc.a, xo)
        fo = sub.value(xo)
        rel = abs(sub.value(rs.x) - fo) / abs(fo)
        ok = r.converged and step <= 1e-6 and not infeasible and rel <= 1e-6 and kkt <= 1e-8
        report(10, "SVM dual", ok,
               f"n=200: {r.iterations} iterations, last step {step:.1e}, "
               f"{len(infeasible)} infeasible iterates; n=50: rel. objective gap {rel:.1e} "
               f"(oracle KKT violation {kkt:.1e})")


class TestVectorization:
    """Criterion 11: trace-ratio stepsizes equal BB on flattened blocks."""

    def test_criterion_11(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(1000):
            n, r = int(rng.integers(1, 60)), int(rng.integers(1, 12))
            S = rng.standard_normal((n, r))
            Y = S * rng.uniform(0.1, 10.0, (n, r)) + 0.1 * rng.standard_normal((n, r))
            if rng.random() < 0.5:
                S, Y = np.asfortranarray(S), np.asfortranarray(Y)
            m = mbb_stepsizes(S, Y)
            ref = bb_pair(S.ravel(), Y.ravel())
            worst = max(worst, abs(m.bb1 - ref.bb1) / abs(ref.bb1), abs(m.bb2 - ref.bb2) / abs(ref.bb2))
        report(11, "vectorization identity", worst <= 1e-14,
               f"max relative difference over 1000 shapes {worst:.1e}")


class TestPenaltyGradient:
    """Criterion 12: penalty-model gradient against central differences."""

    def test_criterion_12(self):
        rng = np.random.default_rng(12)
        worst = 0.0
        for _ in range(100):
            n, r = int(rng.integers(3, 30)), int(rng.integers(1, 6))
            B = rng.standard_normal((n, n))
            A = DenseOperator(B @ B.T / n + np.eye(n))
            m = PenaltyModel(A, float(rng.uniform(0.5, 5.0)), r)
            X = rng.standard_normal((n, r))
            D = rng.standard_normal((n, r))
            D /= np.linalg.norm(D)
            h = 1e-5 * (1.0 + np.linalg.norm(X))
            fd = (p_mu_value(m, X + h * D) - p_mu_value(m, X - h * D)) / (2 * h)
            an = float(np.sum(p_mu_grad(m, X) * D))
            worst = max(worst, abs(fd - an) / max(abs(an), 1e-8 * np.linalg.norm(p_mu_grad(m, X))))
        report(12, "penalty gradient check", worst <= 1e-5,
               f"max relative error over 100 pairs {worst:.1e}")
