import numpy as np
import pytest

from oracles import box_qp_oracle, slb_projection_oracle, slb_qp_oracle
from qtgrad.config import Objective, SolverConfig
from qtgrad.errors import InfeasibleConstraintError
from qtgrad.problems import SLBGenSpec, gen_random_box, gen_random_slb
from qtgrad.projgrad import (BoxConstraint, SLBConstraint, active_set, constraint_from_json,
                             constraint_to_json, project, project_box, project_slb,
                             search_direction, solve_projected, stationarity_residual, ybar_box,
                             ybar_slb)


def unit_box(n):
    return BoxConstraint(-np.ones(n), np.ones(n))


class TestConstraints:
    def test_box_projection(self):
        c = BoxConstraint([0.0, -np.inf], [1.0, 2.0])
        np.testing.assert_array_equal(project_box([-1.0, 5.0], c), [0.0, 2.0])
        np.testing.assert_array_equal(project_box([0.5, -1e9], c), [0.5, -1e9])
        assert c.is_feasible(np.array([1.0, -3.0]))

    def test_box_validation(self):
        with pytest.raises(ValueError):
            BoxConstraint([1.0], [0.0])
        with pytest.raises(ValueError):
            BoxConstraint([0.0, 0.0], [1.0])

    def test_unbounded_box_is_identity(self):
        x = np.array([3.0, -7.0])
        np.testing.assert_array_equal(project(x, BoxConstraint.unbounded(2)), x)
        np.testing.assert_array_equal(project(x, None), x)

    def test_slb_projection_against_enumeration(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            a = rng.standard_normal(n)
            b = float(a @ rng.uniform(-1, 1, n))
            c = SLBConstraint(unit_box(n), a, b)
            x = 2 * rng.standard_normal(n)
            z = project_slb(x, c)
            np.testing.assert_allclose(z, slb_projection_oracle(x, -np.ones(n), np.ones(n), a, b),
                                       atol=1e-10)
            assert c.is_feasible(z)

    def test_slb_infeasible(self):
        with pytest.raises(InfeasibleConstraintError):
            SLBConstraint(unit_box(2), np.ones(2), 3.0)
        with pytest.raises(ValueError):
            SLBConstraint(unit_box(2), np.ones(3), 0.0)

    def test_json_round_trip(self):
        c = SLBConstraint(BoxConstraint([0.0, -np.inf], [np.inf, 1.0]), [1.0, 2.0], 0.5)
        d = constraint_from_json(constraint_to_json(c))
        np.testing.assert_array_equal(d.box.l, c.box.l)
        np.testing.assert_array_equal(d.box.u, c.box.u)
        np.testing.assert_array_equal(d.a, c.a)
        assert d.b == c.b
        b = constraint_from_json(constraint_to_json(unit_box(3)))
        assert isinstance(b, BoxConstraint)
        with pytest.raises(ValueError):
            constraint_from_json('{"type": "ball"}')


class TestBuildingBlocks:
    def test_search_direction(self):
        c = unit_box(2)
        d = search_direction(np.array([0.5, 0.0]), np.array([-1.0, 1.0]), 1.0, c)
        np.testing.assert_array_equal(d, [0.5, -1.0])
        with pytest.raises(ValueError):
            search_direction(np.zeros(2), np.ones(2), 0.0, c)

    def test_residual_zero_at_kkt_point(self):
        c = unit_box(2)
        # at the upper bound with the gradient pushing outward
        assert stationarity_residual(np.array([1.0, 0.0]), np.array([-3.0, 0.0]), c) == 0.0
        assert stationarity_residual(np.array([0.0, 0.0]), np.array([0.5, 0.0]), c) == 0.5

    def test_ybar(self):
        y = np.array([1.0, 2.0, 3.0])
        s = np.array([0.1, 0.0, -0.2])
        np.testing.assert_array_equal(ybar_box(y, s), [1.0, 0.0, 3.0])
        a = np.array([1.0, 5.0, 1.0])
        out = ybar_slb(y, s, a)
        assert out[1] == 0.0
        assert out[[0, 2]] @ a[[0, 2]] == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(out[[0, 2]], [-1.0, 1.0])

    def test_active_set_rules(self):
        c = unit_box(3)
        x_old = np.array([1.0, 0.2, -1.0])
        x_new = np.array([1.0, 0.2, -0.5])
        s = x_new - x_old
        np.testing.assert_array_equal(active_set(s), [True, True, False])
        np.testing.assert_array_equal(active_set(s, x_new, x_old, c, "bounds"), [True, False, False])
        with pytest.raises(ValueError):
            active_set(s, rule="guess")


class TestSolver:
    def test_box_qp_matches_oracle(self):
        for seed in range(10):
            qp, x_star = gen_random_box(SLBGenSpec(6, ncond=2, na_xstar=2, na_x1=3), seed=seed)
            box = qp.constraint
            xo = box_qp_oracle(qp.A.to_dense(), qp.c, box.l, box.u)
            np.testing.assert_allclose(xo, x_star, atol=1e-10)
            r = solve_projected(qp.objective(), box, qp.x0, SolverConfig(eps=1e-10))
            assert r.converged
            np.testing.assert_allclose(r.x, xo, atol=1e-7)

    def test_slb_qp_matches_oracle(self):
        qp, x_star = gen_random_slb(SLBGenSpec(8, ncond=2, na_xstar=3, na_x1=2), seed=1)
        c = qp.constraint
        xo = slb_qp_oracle(qp.A.to_dense(), qp.c, c.box.l, c.box.u, c.a, c.b)
        np.testing.assert_allclose(xo, x_star, atol=1e-9)
        r = solve_projected(qp.objective(), c, qp.x0, SolverConfig(eps=1e-10))
        np.testing.assert_allclose(r.x, x_star, atol=1e-7)

    def test_iterates_stay_feasible(self):
        qp, _ = gen_random_slb(SLBGenSpec(30, ncond=3, na_xstar=5, na_x1=5), seed=2)
        c = qp.constraint
        bad = []
        solve_projected(qp.objective(), c, qp.x0, SolverConfig.for_slb(eps=1e-8),
                        callback=lambda k, x, g, a: bad.append(k) if not c.is_feasible(x, 1e-10) else None)
        assert bad == []

    def test_step_rule_and_bounds_rule(self):
        qp, x_star = gen_random_slb(SLBGenSpec(30, ncond=2, na_xstar=5, na_x1=5), seed=3)
        for rule in ("zero_step", "bounds"):
            cfg = SolverConfig.for_slb(eps=1e-10, slb_active_rule=rule)
            r = solve_projected(qp.objective(), qp.constraint, qp.x0, cfg)
            assert r.info["step_norm"] <= 1e-10 or r.termination == "stalled"
            np.testing.assert_allclose(r.x, x_star, atol=1e-6)

    def test_projects_infeasible_start(self):
        f = Objective(lambda x: 0.5 * float(x @ x), lambda x: x, 2)
        r = solve_projected(f, BoxConstraint([1.0, -1.0], [2.0, 1.0]), np.array([5.0, 5.0]))
        np.testing.assert_allclose(r.x, [1.0, 0.0], atol=1e-8)

    def test_solution_at_start(self):
        f = Objective(lambda x: float(x @ x), lambda x: 2 * x, 2)
        r = solve_projected(f, unit_box(2), np.zeros(2))
        assert r.converged and r.iterations == 0

    def test_reports_are_consistent(self):
        qp, _ = gen_random_box(SLBGenSpec(20, ncond=3, na_xstar=4, na_x1=4), seed=4)
        r = solve_projected(qp.objective(), qp.constraint, qp.x0, SolverConfig(eps=1e-8))
        assert len(r.line_search) == r.iterations == len(r.branches)
        for f_ref, lam, gd, f_new in r.line_search:
            assert 0 < lam <= 1 and gd < 0 and f_new <= f_ref + 1e-4 * lam * gd
