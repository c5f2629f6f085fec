import numpy as np
import pytest

from qtgrad.config import SolverConfig
from qtgrad.errors import NotPositiveDefiniteError
from qtgrad.linops import DenseOperator
from qtgrad.problems import SpectrumSpec, gen_2d_termination_case, gen_random_quadratic
from qtgrad.quadsolver import (QuadraticProblem, solve_abb, solve_bb1, solve_bb_new_once,
                               solve_quadratic, termination_check)


def small_problem(n=30, seed=0):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = (Q * np.logspace(0, 3, n)) @ Q.T
    x_star = rng.standard_normal(n)
    return QuadraticProblem(DenseOperator(0.5 * (A + A.T)), A @ x_star, np.zeros(n), x_star=x_star)


class TestQuadraticProblem:
    def test_value_and_gradient(self):
        p = QuadraticProblem(np.array([2.0, 4.0]), np.array([2.0, 4.0]), np.zeros(2), offset=3.0)
        assert p.value(np.ones(2)) == pytest.approx(0.5 * 6 - 6 + 3)
        np.testing.assert_array_equal(p.grad(np.ones(2)), [0.0, 0.0])
        assert p.looks_spd()

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            QuadraticProblem(np.ones(2), np.ones(3), np.zeros(2))

    def test_indefinite_detected(self):
        p = QuadraticProblem(np.array([1.0, -1.0]), np.zeros(2), np.ones(2))
        assert not p.looks_spd()
        with pytest.raises(NotPositiveDefiniteError):
            solve_bb1(p)

    def test_termination_check(self):
        assert termination_check(np.array([3.0, 4.0]), 10.0, 0.5)
        assert not termination_check(np.array([3.0, 4.0]), 10.0, 0.4)


class TestSolvers:
    @pytest.mark.parametrize("solver", [solve_quadratic, solve_bb1,
                                        lambda p, cfg: solve_abb(p, 0.15, cfg)])
    def test_converges_to_solution(self, solver):
        p = small_problem()
        r = solver(p, SolverConfig(eps=1e-10))
        assert r.converged
        np.testing.assert_allclose(r.x, p.x_star, atol=1e-6)
        assert r.grad_norm_history[-1] <= 1e-10 * r.grad_norm_history[0]

    def test_first_two_steps(self):
        p = small_problem()
        steps = []
        solve_quadratic(p, SolverConfig(eps=1e-8), trace=lambda ev: steps.append(ev))
        g1 = p.grad(p.x0)
        assert steps[0]["alpha"] == pytest.approx((g1 @ g1) / (g1 @ p.A.matvec(g1)))
        assert steps[0]["branch"] == "sd" and steps[1]["branch"] == "bb1"

    def test_bb1_scheme_matches_plain_bb(self):
        p = small_problem(seed=1)
        a = solve_quadratic(p, SolverConfig(eps=1e-8, scheme="bb1"))
        b = solve_bb1(p, SolverConfig(eps=1e-8))
        assert a.iterations == b.iterations
        np.testing.assert_array_equal(a.x, b.x)

    def test_short_branch_used(self):
        p = gen_random_quadratic(SpectrumSpec(1, 200, 1e4), seed=0)
        r = solve_quadratic(p, SolverConfig(eps=1e-8))
        assert r.converged and "short" in r.branches and "long" in r.branches
        # error bound ||x - x*|| <= ||g|| / lambda_min, lambda_min = 2
        assert np.linalg.norm(r.x - p.x_star) <= np.linalg.norm(p.grad(r.x)) / 2.0 * (1 + 1e-9)
        assert p.value(r.x) == pytest.approx(0.0, abs=1e-6)

    def test_fixed_scheme_converges(self):
        p = small_problem(seed=2)
        assert solve_quadratic(p, SolverConfig(eps=1e-8, scheme="fixed")).converged

    def test_abb_tau_validation(self):
        with pytest.raises(ValueError):
            solve_abb(small_problem(), 0.0)

    def test_zero_gradient_start(self):
        p = QuadraticProblem(np.ones(2), np.ones(2), np.ones(2))
        r = solve_quadratic(p)
        assert r.converged and r.iterations == 0


class TestSingleNewStep:
    @pytest.mark.parametrize("variant", ["bb1", "bb2"])
    def test_terminates_on_2d(self, variant):
        p = gen_2d_termination_case(1000.0, seed=5)
        r = solve_bb_new_once(p, variant, new_at=3, n_iter=5)
        assert r.grad_norm_history[-1] <= 1e-10
        assert r.branches[2] == "new"

    def test_plain_variant_does_not(self):
        p = gen_2d_termination_case(1000.0, seed=5)
        r = solve_bb_new_once(p, "bb1", new_at=None, n_iter=5)
        assert r.grad_norm_history[-1] > 1e-6
        assert len(r.grad_norm_history) == 6

    def test_invalid_variant(self):
        with pytest.raises(ValueError):
            solve_bb_new_once(gen_2d_termination_case(10.0), "sd")
