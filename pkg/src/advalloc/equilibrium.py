"""Nash-equilibrium machinery for the sequence game.

The zero-sum game has budget sequences as row (maximizer) strategies and
price sequences as column (minimizer) strategies; entries are gaps. Small
games are solved exactly with one LP per player; larger ones go through
strategy generation (double oracle): subgames solved by the same simplex,
best responses by exact payoff scans, terminating only when the upper and
lower certificates meet. Fictitious play provides an any-size approximate
value bracket. A separate prefix-family LP computes the optimal per-user
acceptance probabilities against a fixed budget sequence.
"""
from __future__ import annotations

import dataclasses
import itertools
from typing import Sequence

import numpy as np

from .game import (
    GameConfig,
    benchmark_rows,
    validate_budgets,
    validate_prices,
    welfare_grid,
)
from .simplex import solve_lp

VALUE_TOL = 1e-6
DEFAULT_MATRIX_CAP = 2 * 1024**3
DIRECT_LP_CELLS = 300_000


class PayoffTooLargeError(ValueError):
    """Matrix would exceed the memory cap; use fictitious_play instead."""


@dataclasses.dataclass(frozen=True)
class PayoffMatrix:
    """Gap table over explicit strategy lists (rows maximize, columns minimize)."""

    rows: np.ndarray      # (M, N) budget sequences, zero-padded to length N
    cols: np.ndarray      # (K, N) price sequences, zero-padded
    values: np.ndarray    # (M, K) float64 gaps

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclasses.dataclass(frozen=True)
class MixedStrategy:
    row_mix: np.ndarray
    col_mix: np.ndarray
    row_value: float    # best guaranteed expected gap for the budget player
    col_value: float    # best expected-gap cap for the price player

    @property
    def value(self) -> float:
        return 0.5 * (self.row_value + self.col_value)


@dataclasses.dataclass(frozen=True)
class FictitiousPlayResult:
    lower: float
    upper: float
    row_avg: np.ndarray
    col_avg: np.ndarray
    iterations: int

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def enumerate_strategies(value_set: Sequence[int], length: int) -> np.ndarray:
    """All value_set^length sequences, lexicographic order, one per row."""
    values = list(value_set)
    count = len(values) ** length
    out = np.fromiter(
        itertools.chain.from_iterable(itertools.product(values, repeat=length)),
        dtype=np.int64, count=count * length)
    return out.reshape(count, length)


def _pad_rows(seqs, n: int) -> np.ndarray:
    rows = np.zeros((len(seqs), n), dtype=np.int64)
    for i, s in enumerate(seqs):
        s = np.asarray(s, dtype=np.int64)
        if s.shape[0] > n:
            raise ValueError(f"sequence length {s.shape[0]} exceeds n_users {n}")
        rows[i, : s.shape[0]] = s
    return rows


def build_payoff_matrix(cfg: GameConfig, row_strategies=None, col_strategies=None, *,
                        max_bytes: int = DEFAULT_MATRIX_CAP) -> PayoffMatrix:
    """Gap matrix over the given (or fully enumerated) pure-strategy lists.

    Variable-length row strategies (prefix-style) are zero-padded; a padded
    column is replayed only along the row's real length because zero budgets
    never accept. Column strategies must be full length.
    """
    if row_strategies is None:
        rows = enumerate_strategies(cfg.budget_set, cfg.n_users)
    else:
        for s in row_strategies:
            validate_budgets(cfg, s, allow_partial=True)
        rows = _pad_rows(row_strategies, cfg.n_users)
    if col_strategies is None:
        cols = enumerate_strategies(cfg.price_set, cfg.n_users)
    else:
        for s in col_strategies:
            validate_prices(cfg, s)
        cols = _pad_rows(col_strategies, cfg.n_users)
    needed = rows.shape[0] * cols.shape[0] * 8
    if needed > max_bytes:
        raise PayoffTooLargeError(
            f"{rows.shape[0]}x{cols.shape[0]} needs {needed / 1e9:.1f} GB > cap; "
            "use fictitious_play with an implicit evaluator")
    bench = benchmark_rows(rows, cfg.n_resources)
    values = (bench[:, None] - welfare_grid(rows, cols, cfg.n_resources)).astype(np.float64)
    return PayoffMatrix(rows=rows, cols=cols, values=values)


def _game_lps(C: np.ndarray) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Solve both players' LPs on a (possibly restricted) payoff matrix."""
    M, K = C.shape
    shift = float(C.min())
    Cs = C - shift + 1.0  # strictly positive entries keep the value positive
    # column player: max 1'u s.t. Cs u <= 1  (u = col_mix / value)
    col = solve_lp(-np.ones(K), A_ub=Cs, b_ub=np.ones(M))
    total_u = -col.objective
    v_col = 1.0 / total_u
    col_mix = col.x * v_col
    # row player: min 1'w s.t. Cs' w >= 1  (w = row_mix / value)
    row = solve_lp(np.ones(M), A_ub=-Cs.T, b_ub=-np.ones(K))
    v_row = 1.0 / row.objective
    row_mix = row.x * v_row
    return v_row + shift - 1.0, row_mix, v_col + shift - 1.0, col_mix


def _certify(C: np.ndarray, mixed: MixedStrategy, tol: float) -> None:
    v = mixed.value
    if abs(mixed.row_value - mixed.col_value) > tol:
        raise ArithmeticError(
            f"player values disagree: {mixed.row_value} vs {mixed.col_value}")
    col_payoff = C @ mixed.col_mix
    row_payoff = mixed.row_mix @ C
    if col_payoff.max() > v + tol or row_payoff.min() < v - tol:
        raise ArithmeticError("equilibrium certificate violated")


def solve_zero_sum(payoff, *, tol: float = VALUE_TOL) -> MixedStrategy:
    """Exact equilibrium of the matrix game.

    Games up to a few hundred thousand cells are solved directly; beyond
    that, strategy generation grows row/column supports until the
    best-response certificate closes, so the result is exact either way.
    """
    C = payoff.values if isinstance(payoff, PayoffMatrix) else np.asarray(payoff, dtype=np.float64)
    if C.ndim != 2 or 0 in C.shape:
        raise ValueError(f"payoff matrix must be 2-D and non-empty, got {C.shape}")
    M, K = C.shape
    if M * K <= DIRECT_LP_CELLS:
        v_row, row_mix, v_col, col_mix = _game_lps(C)
        mixed = MixedStrategy(row_mix=row_mix, col_mix=col_mix,
                              row_value=v_row, col_value=v_col)
        _certify(C, mixed, tol)
        return mixed
    return _solve_by_strategy_generation(C, tol)


def _solve_by_strategy_generation(C: np.ndarray, tol: float) -> MixedStrategy:
    M, K = C.shape
    row_support = [0]
    col_support = [0]
    for _ in range(M + K + 1):
        sub = C[np.ix_(row_support, col_support)]
        _, sub_row, _, sub_col = _game_lps(sub)
        # exact best responses against the subgame optimum
        col_full = np.zeros(K)
        col_full[col_support] = sub_col
        row_payoffs = C[:, col_support] @ sub_col
        best_row = int(np.argmax(row_payoffs))
        upper = float(row_payoffs[best_row])
        col_payoffs = sub_row @ C[row_support, :]
        best_col = int(np.argmin(col_payoffs))
        lower = float(col_payoffs[best_col])
        if upper - lower <= tol:
            row_full = np.zeros(M)
            row_full[row_support] = sub_row
            mixed = MixedStrategy(row_mix=row_full, col_mix=col_full,
                                  row_value=lower, col_value=upper)
            _certify(C, mixed, max(tol, VALUE_TOL))
            return mixed
        if best_row not in row_support:
            row_support.append(best_row)
        if best_col not in col_support:
            col_support.append(best_col)
    raise ArithmeticError("strategy generation failed to close the certificate")


def solve_acceptance_lp(seq: Sequence[int], n_resources: int) -> tuple[float, np.ndarray]:
    """Optimal per-user acceptance probabilities against prefix adversaries.

    Minimizes z subject to, for every prefix j:
    top-min(R, j) sum of seq[:j]  -  sum_{i<=j} seq[i] P_i  <=  z,
    with sum P <= R and 0 <= P <= 1. Appending zero-budget users changes
    nothing (their prefixes add inert constraints).
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 1 or seq.shape[0] == 0:
        raise ValueError("sequence must be a non-empty 1-D list of budgets")
    if (seq < 0).any():
        raise ValueError("budgets must be non-negative")
    L = seq.shape[0]
    if n_resources < 1:
        raise ValueError("n_resources must be positive")
    bench = np.empty(L)
    for j in range(L):
        prefix = np.sort(seq[: j + 1])
        bench[j] = prefix[max(0, j + 1 - n_resources):].sum()
    # variables: P_1..P_L, z
    c = np.zeros(L + 1)
    c[-1] = 1.0
    A = np.zeros((L + 1 + L, L + 1))
    b = np.zeros(L + 1 + L)
    for j in range(L):
        A[j, : j + 1] = -seq[: j + 1]
        A[j, -1] = -1.0
        b[j] = -bench[j]
    A[L, :L] = 1.0
    b[L] = float(n_resources)
    A[L + 1:, :L] = np.eye(L)
    b[L + 1:] = 1.0
    res = solve_lp(c, A_ub=A, b_ub=b)
    return res.objective, res.x[:L]


def fictitious_play(payoff, iterations: int = 100_000, *,
                    checkpoint_every: int = 100) -> FictitiousPlayResult:
    """Simultaneous best-response dynamics with a certified value bracket.

    Each step both players best-respond (lowest index on ties) to the
    opponent's empirical average. Any step's averages give valid bounds
    lower <= v* <= upper, so the tightest checkpointed bracket is reported.
    """
    C = payoff.values if isinstance(payoff, PayoffMatrix) else np.asarray(payoff, dtype=np.float64)
    if C.ndim != 2 or 0 in C.shape:
        raise ValueError(f"payoff matrix must be 2-D and non-empty, got {C.shape}")
    if iterations < 1:
        raise ValueError("iterations must be positive")
    M, K = C.shape
    row_payoff = np.zeros(M)   # cumulative C @ (col picks)
    col_payoff = np.zeros(K)   # cumulative (row picks) @ C
    row_counts = np.zeros(M)
    col_counts = np.zeros(K)
    best_lower = -np.inf
    best_upper = np.inf
    for t in range(1, iterations + 1):
        i = int(np.argmax(row_payoff))
        j = int(np.argmin(col_payoff))
        row_counts[i] += 1
        col_counts[j] += 1
        row_payoff += C[:, j]
        col_payoff += C[i, :]
        if t % checkpoint_every == 0 or t == iterations:
            best_lower = max(best_lower, float(col_payoff.min()) / t)
            best_upper = min(best_upper, float(row_payoff.max()) / t)
    return FictitiousPlayResult(
        lower=best_lower,
        upper=best_upper,
        row_avg=row_counts / iterations,
        col_avg=col_counts / iterations,
        iterations=iterations,
    )
