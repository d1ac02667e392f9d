"""Equilibrium values: payoff construction, LP solving, fictitious play."""
import numpy as np
import pytest
from scipy.optimize import linprog

from advalloc.equilibrium import (
    FictitiousPlayResult,
    MixedStrategy,
    PayoffMatrix,
    PayoffTooLargeError,
    build_payoff_matrix,
    enumerate_strategies,
    fictitious_play,
    solve_acceptance_lp,
    solve_zero_sum,
)
from advalloc.game import GameConfig, gap


def scipy_game_value(C):
    """Independent oracle: column player's LP via HiGHS."""
    M, K = C.shape
    shift = C.min()
    Cs = C - shift + 1.0
    res = linprog(-np.ones(K), A_ub=Cs, b_ub=np.ones(M),
                  bounds=[(0, None)] * K, method="highs")
    assert res.status == 0
    return 1.0 / (-res.fun) + shift - 1.0


def cfg(n, r, prices, budgets):
    return GameConfig(n_users=n, n_resources=r, price_set=prices, budget_set=budgets)


class TestEnumerate:
    def test_lexicographic(self):
        got = enumerate_strategies((1, 2), 2)
        assert got.tolist() == [[1, 1], [1, 2], [2, 1], [2, 2]]

    def test_cardinality(self):
        assert enumerate_strategies((1, 3, 5, 7), 7).shape == (16384, 7)


class TestBuildPayoff:
    def test_single_user_closed_form(self):
        c = cfg(1, 1, (1, 2), (1, 2))
        pm = build_payoff_matrix(c)
        # entry = b * 1(b < p)
        assert pm.values.tolist() == [[0.0, 1.0], [0.0, 0.0]]

    def test_entries_match_scalar_gap(self):
        c = cfg(3, 2, (1, 2), (1, 2, 3))
        pm = build_payoff_matrix(c)
        rng = np.random.default_rng(5)
        for _ in range(25):
            i = int(rng.integers(pm.rows.shape[0]))
            j = int(rng.integers(pm.cols.shape[0]))
            assert pm.values[i, j] == gap(c, pm.rows[i].tolist(), pm.cols[j].tolist())
        assert (pm.values >= 0).all()

    def test_prefix_rows_padded(self):
        c = cfg(3, 1, (1, 2), (1, 2))
        pm = build_payoff_matrix(c, row_strategies=[(2,), (1, 2), (1, 1, 2)],
                                 col_strategies=[(1, 1, 1)])
        assert pm.rows.tolist() == [[2, 0, 0], [1, 2, 0], [1, 1, 2]]
        assert pm.values[0, 0] == 0      # accepted immediately
        assert pm.values[1, 0] == 1      # unit burnt on the 1, benchmark 2
        assert pm.values[2, 0] == 1

    def test_memory_cap(self):
        c = cfg(7, 3, (1, 3, 5, 7), (2, 4, 6))
        with pytest.raises(PayoffTooLargeError):
            build_payoff_matrix(c, max_bytes=1000)


class TestSolveZeroSum:
    def test_lowest_price_dominates(self):
        mixed = solve_zero_sum(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert mixed.value == pytest.approx(0.0, abs=1e-9)
        assert mixed.col_mix == pytest.approx([1.0, 0.0], abs=1e-9)

    def test_matching_pennies(self):
        mixed = solve_zero_sum(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert mixed.value == pytest.approx(0.5, abs=1e-9)
        assert mixed.row_mix == pytest.approx([0.5, 0.5], abs=1e-8)
        assert mixed.col_mix == pytest.approx([0.5, 0.5], abs=1e-8)

    def test_restricted_game_value(self):
        c = cfg(7, 3, (1, 2, 3), (1, 2, 3))
        price_rows = [(1, 1, 2, 2, 3, 3, 3), (1, 1, 1, 2, 2, 2, 3), (1, 2, 2, 2, 3, 3, 3)]
        pm = build_payoff_matrix(c, col_strategies=price_rows)
        assert pm.shape == (2187, 3)
        mixed = solve_zero_sum(pm)
        assert mixed.value == pytest.approx(13.0 / 3.0, abs=1e-6)
        assert abs(mixed.row_value - mixed.col_value) <= 1e-6

    def test_random_matrices_match_scipy(self):
        rng = np.random.default_rng(77)
        for _ in range(40):
            M, K = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            C = rng.integers(0, 10, size=(M, K)).astype(float)
            mixed = solve_zero_sum(C)
            assert mixed.value == pytest.approx(scipy_game_value(C), abs=1e-7)
            # certificate: row_mix guarantees >= value, col_mix caps <= value
            assert (C @ mixed.col_mix).max() <= mixed.value + 1e-6
            assert (mixed.row_mix @ C).min() >= mixed.value - 1e-6

    def test_strategy_generation_path_matches_direct(self):
        rng = np.random.default_rng(3)
        C = rng.integers(0, 12, size=(80, 90)).astype(float)
        direct = solve_zero_sum(C)
        from advalloc.equilibrium import _solve_by_strategy_generation
        generated = _solve_by_strategy_generation(C, 1e-9)
        assert generated.value == pytest.approx(direct.value, abs=1e-7)

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            solve_zero_sum(np.zeros((0, 3)))
        with pytest.raises(ValueError):
            solve_zero_sum(np.zeros(4))


class TestAcceptanceLp:
    def test_uniform_abundant_is_zero(self):
        z, P = solve_acceptance_lp([3, 3], 5)
        assert z == pytest.approx(0.0, abs=1e-9)

    def test_known_small_instance(self):
        # one unit, budgets 1 then 2: P = (1/2, 1/2) equalizes both prefix
        # gaps at 1/2, and any other split raises one of them
        z, P = solve_acceptance_lp([1, 2], 1)
        assert z == pytest.approx(0.5, abs=1e-9)
        assert 1 - P[0] <= z + 1e-9
        assert 2 - P[0] - 2 * P[1] <= z + 1e-9

    def test_zero_padding_invariant(self):
        seq = [1, 1, 2, 2, 3]
        z1, _ = solve_acceptance_lp(seq, 2)
        z2, _ = solve_acceptance_lp(seq + [0, 0, 0], 2)
        assert z1 == pytest.approx(z2, abs=1e-9)

    def test_probabilities_feasible(self):
        seq = [1] * 5 + [2] * 5 + [3] * 5 + [4] * 5 + [5] * 5
        z, P = solve_acceptance_lp(seq, 5)
        assert (P >= -1e-9).all() and (P <= 1 + 1e-9).all()
        assert P.sum() <= 5 + 1e-8
        # every prefix's gap is within z
        for j in range(1, 26):
            bench = sum(sorted(seq[:j], reverse=True)[: min(5, j)])
            assert bench - np.dot(seq[:j], P[:j]) <= z + 1e-7

    def test_input_validation(self):
        with pytest.raises(ValueError):
            solve_acceptance_lp([], 1)
        with pytest.raises(ValueError):
            solve_acceptance_lp([1, 2], 0)
        with pytest.raises(ValueError):
            solve_acceptance_lp([-1, 2], 1)


class TestFictitiousPlay:
    def test_dominant_column(self):
        res = fictitious_play(np.array([[0.0, 1.0], [0.0, 0.0]]), 500)
        assert res.upper <= 0.05
        assert res.lower >= -1e-12
        assert isinstance(res, FictitiousPlayResult)

    def test_bracket_contains_lp_value(self):
        rng = np.random.default_rng(11)
        for _ in range(15):
            C = rng.integers(0, 8, size=(10, 10)).astype(float)
            lp = solve_zero_sum(C)
            fp = fictitious_play(C, 1000, checkpoint_every=50)
            assert fp.lower - 1e-9 <= lp.value <= fp.upper + 1e-9
            assert fp.width >= -1e-12

    def test_averages_are_distributions(self):
        C = np.array([[2.0, 0.0], [1.0, 3.0]])
        res = fictitious_play(C, 300)
        assert res.row_avg.sum() == pytest.approx(1.0)
        assert res.col_avg.sum() == pytest.approx(1.0)

    def test_deterministic(self):
        C = np.arange(12, dtype=float).reshape(3, 4) % 5
        a = fictitious_play(C, 200)
        b = fictitious_play(C, 200)
        assert a.lower == b.lower and a.upper == b.upper
        assert (a.row_avg == b.row_avg).all()

    def test_validation(self):
        with pytest.raises(ValueError):
            fictitious_play(np.zeros((2, 2)), 0)


class TestSolveStrategyTypes:
    def test_accepts_payoff_matrix(self):
        c = cfg(2, 1, (1, 2), (1, 2))
        pm = build_payoff_matrix(c)
        mixed = solve_zero_sum(pm)
        assert isinstance(mixed, MixedStrategy)
        assert isinstance(pm, PayoffMatrix)
        fp = fictitious_play(pm, 100)
        assert fp.lower - 1e-9 <= mixed.value <= fp.upper + 1e-9
