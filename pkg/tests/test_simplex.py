"""Simplex solver vs hand results and scipy's HiGHS as an independent oracle."""
import numpy as np
import pytest
from scipy.optimize import linprog

from advalloc.simplex import InfeasibleError, LpSolution, UnboundedError, solve_lp


class TestHandCases:
    def test_basic_max(self):
        # min -(x+y) s.t. x+y <= 1
        res = solve_lp([-1, -1], A_ub=[[1, 1]], b_ub=[1])
        assert res.objective == pytest.approx(-1.0, abs=1e-9)
        assert res.x.sum() == pytest.approx(1.0, abs=1e-9)

    def test_two_constraints(self):
        # classic diet-style: min 2x+3y, x+y >= 4, x >= 1  (as <= with negation)
        res = solve_lp([2, 3], A_ub=[[-1, -1], [-1, 0]], b_ub=[-4, -1])
        assert res.objective == pytest.approx(8.0, abs=1e-8)
        assert res.x == pytest.approx([4.0, 0.0], abs=1e-8)

    def test_equality(self):
        res = solve_lp([1, 2], A_eq=[[1, 1]], b_eq=[3])
        assert res.objective == pytest.approx(3.0, abs=1e-9)
        assert res.x == pytest.approx([3.0, 0.0], abs=1e-9)

    def test_mixed(self):
        # min x1 + x2 + x3, x1 + x2 = 2, x2 + x3 >= 1
        res = solve_lp([1, 1, 1], A_ub=[[0, -1, -1]], b_ub=[-1],
                       A_eq=[[1, 1, 0]], b_eq=[2])
        assert res.objective == pytest.approx(2.0, abs=1e-8)

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            solve_lp([1], A_ub=[[1], [-1]], b_ub=[1, -3])

    def test_unbounded(self):
        with pytest.raises(UnboundedError):
            solve_lp([-1, 0], A_ub=[[0, 1]], b_ub=[1])

    def test_degenerate_does_not_cycle(self):
        # Beale's cycling example for Dantzig pivoting
        c = [-0.75, 150, -0.02, 6]
        A = [[0.25, -60, -1 / 25, 9],
             [0.5, -90, -1 / 50, 3],
             [0, 0, 1, 0]]
        b = [0, 0, 1]
        res = solve_lp(c, A_ub=A, b_ub=b)
        assert res.objective == pytest.approx(-0.05, abs=1e-9)

    def test_returns_solution_type(self):
        assert isinstance(solve_lp([0], A_ub=[[1]], b_ub=[1]), LpSolution)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            solve_lp([1, 2], A_ub=[[1]], b_ub=[1])
        with pytest.raises(ValueError):
            solve_lp([1])


class TestAgainstScipy:
    def test_random_bounded_lps(self):
        rng = np.random.default_rng(1234)
        for trial in range(60):
            n = int(rng.integers(2, 7))
            m = int(rng.integers(1, 6))
            A = rng.integers(-4, 5, size=(m, n)).astype(float)
            b = rng.integers(0, 9, size=m).astype(float)
            c = rng.integers(-5, 6, size=n).astype(float)
            # cap the box so every instance is bounded
            A_full = np.vstack([A, np.ones((1, n))])
            b_full = np.concatenate([b, [50.0]])
            ref = linprog(c, A_ub=A_full, b_ub=b_full, bounds=[(0, None)] * n,
                          method="highs")
            assert ref.status == 0
            res = solve_lp(c, A_ub=A_full, b_ub=b_full)
            assert res.objective == pytest.approx(ref.fun, abs=1e-7), f"trial {trial}"
            # returned point must be feasible
            assert (A_full @ res.x <= b_full + 1e-7).all()
            assert (res.x >= -1e-9).all()

    def test_random_with_equalities(self):
        rng = np.random.default_rng(99)
        solved = 0
        for _ in range(60):
            n = int(rng.integers(2, 6))
            A_eq = rng.integers(0, 4, size=(1, n)).astype(float)
            if not A_eq.any():
                continue
            b_eq = np.array([float(rng.integers(1, 8))])
            c = rng.integers(-4, 5, size=n).astype(float)
            cap = np.ones((1, n))
            ref = linprog(c, A_ub=cap, b_ub=[30.0], A_eq=A_eq, b_eq=b_eq,
                          bounds=[(0, None)] * n, method="highs")
            if ref.status != 0:
                with pytest.raises(InfeasibleError):
                    solve_lp(c, A_ub=cap, b_ub=[30.0], A_eq=A_eq, b_eq=b_eq)
                continue
            res = solve_lp(c, A_ub=cap, b_ub=[30.0], A_eq=A_eq, b_eq=b_eq)
            assert res.objective == pytest.approx(ref.fun, abs=1e-7)
            assert A_eq @ res.x == pytest.approx(b_eq, abs=1e-7)
            solved += 1
        assert solved > 30
