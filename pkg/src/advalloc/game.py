"""Posted-price allocation game: instance config, play-out, benchmark, gap.

One unit of resource per user. A user with budget b faced with posted price p
accepts iff b >= p and a unit is still available; an accepted user pays
nothing here -- welfare is the sum of accepted budgets. The offline benchmark
accepts the largest min(R, N) budgets of the whole sequence. The gap of a
(budget sequence, price sequence) pair is benchmark minus algorithm welfare.

All game values are exact integers. Rational price/budget sets must be
pre-scaled to integers by the caller.
"""
from __future__ import annotations

import dataclasses
from typing import Iterable, Sequence

import numpy as np


def _as_int_tuple(values: Iterable, what: str) -> tuple[int, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise ValueError(f"{what} entries must be integers, got {v!r}")
        out.append(int(v))
    return tuple(out)


@dataclasses.dataclass(frozen=True)
class GameConfig:
    """Instance description: N users, R resource units, price set A, budget set B."""

    n_users: int
    n_resources: int
    price_set: tuple[int, ...]
    budget_set: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "price_set", _as_int_tuple(self.price_set, "price_set"))
        object.__setattr__(self, "budget_set", _as_int_tuple(self.budget_set, "budget_set"))
        if not isinstance(self.n_users, (int, np.integer)) or self.n_users < 1:
            raise ValueError(f"n_users must be a positive integer, got {self.n_users!r}")
        if not isinstance(self.n_resources, (int, np.integer)) or self.n_resources < 1:
            raise ValueError(f"n_resources must be a positive integer, got {self.n_resources!r}")
        object.__setattr__(self, "n_users", int(self.n_users))
        object.__setattr__(self, "n_resources", int(self.n_resources))
        for name, vals in (("price_set", self.price_set), ("budget_set", self.budget_set)):
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            if vals[0] <= 0:
                raise ValueError(f"{name} entries must be positive")
            if any(a >= b2 for a, b2 in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing: {vals}")

    @property
    def upper_bound(self) -> int:
        return self.budget_set[-1]

    @property
    def lower_bound(self) -> int:
        return self.budget_set[0]

    @property
    def n_prices(self) -> int:
        return len(self.price_set)

    @property
    def n_budgets(self) -> int:
        return len(self.budget_set)


@dataclasses.dataclass(frozen=True)
class AllocationTrace:
    """One play-through of a price sequence against a budget sequence."""

    accepted: tuple[bool, ...]
    resources_before: tuple[int, ...]
    alg_welfare: int
    benchmark_flags: tuple[bool, ...]
    benchmark_value: int
    gap: int


def validate_sequence(cfg: GameConfig, seq: Sequence[int], value_set: tuple[int, ...],
                      what: str, allow_partial: bool = False) -> tuple[int, ...]:
    """Check entries against a value set and the instance length; return a tuple."""
    seq = _as_int_tuple(seq, what)
    if allow_partial:
        if len(seq) > cfg.n_users:
            raise ValueError(f"{what} longer than n_users: {len(seq)} > {cfg.n_users}")
    elif len(seq) != cfg.n_users:
        raise ValueError(f"{what} length {len(seq)} != n_users {cfg.n_users}")
    allowed = set(value_set)
    for v in seq:
        if v not in allowed:
            raise ValueError(f"{what} entry {v} not in {value_set}")
    return seq


def validate_budgets(cfg: GameConfig, budgets: Sequence[int],
                     allow_partial: bool = False) -> tuple[int, ...]:
    return validate_sequence(cfg, budgets, cfg.budget_set, "budgets", allow_partial)


def validate_prices(cfg: GameConfig, prices: Sequence[int],
                    allow_partial: bool = False) -> tuple[int, ...]:
    return validate_sequence(cfg, prices, cfg.price_set, "prices", allow_partial)


def benchmark(cfg: GameConfig, budgets: Sequence[int]) -> tuple[int, tuple[bool, ...]]:
    """Offline optimum: value and flags of the top-min(R, len) budgets.

    Ties at the cutoff go to the earliest arrival, which fixes the flags
    canonically; the value is unaffected.
    """
    budgets = validate_budgets(cfg, budgets, allow_partial=True)
    k = min(cfg.n_resources, len(budgets))
    order = sorted(range(len(budgets)), key=lambda i: (-budgets[i], i))
    chosen = set(order[:k])
    flags = tuple(i in chosen for i in range(len(budgets)))
    return sum(budgets[i] for i in chosen), flags


def simulate(cfg: GameConfig, budgets: Sequence[int], prices: Sequence[int]) -> AllocationTrace:
    """Greedy arrival-order play-out of posted prices against a budget sequence.

    Sequences must have equal length (at most n_users; shorter sequences are
    prefixes of an instance, as used by prefix-style pure strategies).
    """
    budgets = validate_budgets(cfg, budgets, allow_partial=True)
    prices = validate_prices(cfg, prices, allow_partial=True)
    if len(budgets) != len(prices):
        raise ValueError(f"length mismatch: {len(budgets)} budgets vs {len(prices)} prices")
    y = cfg.n_resources
    accepted = []
    before = []
    welfare = 0
    for b, p in zip(budgets, prices):
        before.append(y)
        take = y > 0 and b >= p
        accepted.append(take)
        if take:
            welfare += b
            y -= 1
    bench_value, flags = benchmark(cfg, budgets)
    return AllocationTrace(
        accepted=tuple(accepted),
        resources_before=tuple(before),
        alg_welfare=welfare,
        benchmark_flags=flags,
        benchmark_value=bench_value,
        gap=bench_value - welfare,
    )


def gap(cfg: GameConfig, budgets: Sequence[int], prices: Sequence[int]) -> int:
    """Benchmark welfare minus algorithm welfare; always >= 0."""
    return simulate(cfg, budgets, prices).gap


def parse_sequence(text: str) -> tuple[int, ...]:
    """Parse a comma-separated integer sequence ("1,2,3"); whitespace tolerated."""
    parts = [p.strip() for p in text.split(",")]
    if parts == [""]:
        return ()
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"malformed integer sequence {text!r}") from exc


def format_sequence(seq: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in seq)


# Vectorized kernels over many sequences at once. Rows may be zero-padded to a
# common length: a zero budget is below every positive price so it is never
# accepted and never enters the top-R sum, i.e. padding does not change values.

def welfare_grid(budget_rows: np.ndarray, price_rows: np.ndarray, n_resources: int) -> np.ndarray:
    """(M, N) budget rows x (K, N) price rows -> (M, K) algorithm welfare."""
    budget_rows = np.asarray(budget_rows)
    price_rows = np.asarray(price_rows)
    M, N = budget_rows.shape
    K = price_rows.shape[0]
    y = np.full((M, K), n_resources, dtype=np.int32)
    welfare = np.zeros((M, K), dtype=np.int64)
    for i in range(N):
        b = budget_rows[:, i].astype(np.int64)[:, None]
        p = price_rows[:, i][None, :]
        take = (b >= p) & (y > 0) & (b > 0)
        welfare += b * take
        y -= take
    return welfare


def welfare_paired(budget_rows: np.ndarray, price_rows: np.ndarray,
                   n_resources: int) -> np.ndarray:
    """Row-wise welfare of (M, N) budget rows against matching (M, N) price rows."""
    budget_rows = np.asarray(budget_rows)
    price_rows = np.asarray(price_rows)
    M, N = budget_rows.shape
    y = np.full(M, n_resources, dtype=np.int32)
    welfare = np.zeros(M, dtype=np.int64)
    for i in range(N):
        b = budget_rows[:, i].astype(np.int64)
        take = (b >= price_rows[:, i]) & (y > 0) & (b > 0)
        welfare += b * take
        y -= take
    return welfare


def benchmark_rows(budget_rows: np.ndarray, n_resources: int) -> np.ndarray:
    """(M, N) budget rows -> (M,) top-min(R, N) sums (zero padding is inert)."""
    budget_rows = np.asarray(budget_rows)
    M, N = budget_rows.shape
    k = min(n_resources, N)
    top = np.sort(budget_rows, axis=1)[:, N - k:]
    return top.sum(axis=1, dtype=np.int64)
