"""Worst-case budget completion: given posted prices and a realized prefix,
choose budgets for the remaining slots that maximize the gap.

Two routes with equal gap values:

* optimal_completion -- polynomial construction comparing a "starve"
  candidate (every open slot gets the largest budget strictly below its
  price) against "exhaust-then-spike" candidates (spend the remaining k
  units on the k cheapest slots of a growing window at the smallest
  accepting budgets, then post the largest budget after the final accept,
  where it can no longer be served).
* brute_force_completion -- exhaustive enumeration, the verification oracle.
"""
from __future__ import annotations

import dataclasses
import itertools
from typing import Sequence

from .game import GameConfig, gap, validate_budgets, validate_prices


class CompletionTooLargeError(ValueError):
    """Enumeration would exceed the configured completion-count cap."""


@dataclasses.dataclass(frozen=True)
class CompletionResult:
    gap: int
    full_sequence: tuple[int, ...]


def _resources_left(cfg: GameConfig, prefix: Sequence[int], prices: Sequence[int]) -> int:
    y = cfg.n_resources
    for b, p in zip(prefix, prices):
        if y > 0 and b >= p:
            y -= 1
    return y


def optimal_completion(cfg: GameConfig, prices: Sequence[int],
                       realized_prefix: Sequence[int]) -> CompletionResult:
    """Gap-maximizing completion of a realized budget prefix.

    `prices` fixes the posted price of every slot (realized and open alike);
    the construction never re-runs the pricing policy. Ties between the
    starve candidate and the best exhaust candidate keep the starve one;
    among exhaust candidates the earliest window end wins.
    """
    prices = validate_prices(cfg, prices, allow_partial=True)
    prefix = validate_budgets(cfg, realized_prefix, allow_partial=True)
    n = len(prices)
    ell = len(prefix)
    if ell > n:
        raise ValueError(f"prefix length {ell} exceeds sequence length {n}")
    budget_set = cfg.budget_set

    if ell == n:
        return CompletionResult(gap=gap(cfg, prefix, prices), full_sequence=prefix)

    # Starve value per open slot: largest budget strictly below the price,
    # else the smallest budget (nothing rejects, so minimize the benchmark).
    def starve(price: int) -> int:
        below = [b for b in budget_set if b < price]
        return below[-1] if below else budget_set[0]

    starved = [starve(prices[i]) for i in range(ell, n)]
    reject_seq = prefix + tuple(starved)
    gap_reject = gap(cfg, reject_seq, prices)

    k = _resources_left(cfg, prefix, prices)
    best_accept: int | None = None
    best_accept_seq: tuple[int, ...] | None = None

    if k == 0:
        # No unit can ever be served again: spike every open slot.
        cand = prefix + (budget_set[-1],) * (n - ell)
        best_accept = gap(cfg, cand, prices)
        best_accept_seq = cand
    else:
        for end in range(ell + k - 1, n):
            window = range(ell, end + 1)
            cheapest = sorted(window, key=lambda i: (prices[i], i))[:k]
            assigned = {}
            feasible = True
            for i in cheapest:
                at_least = [b for b in budget_set if b >= prices[i]]
                if not at_least:
                    feasible = False
                    break
                assigned[i] = at_least[0]
            if not feasible:
                continue
            last_accept = max(cheapest)
            tail = []
            for i in range(ell, n):
                if i in assigned:
                    tail.append(assigned[i])
                elif i > last_accept:
                    tail.append(budget_set[-1])
                else:
                    tail.append(starved[i - ell])
            cand = prefix + tuple(tail)
            g = gap(cfg, cand, prices)
            if best_accept is None or g > best_accept:
                best_accept = g
                best_accept_seq = cand

    if best_accept is not None and best_accept > gap_reject:
        return CompletionResult(gap=best_accept, full_sequence=best_accept_seq)
    return CompletionResult(gap=gap_reject, full_sequence=reject_seq)


def brute_force_completion(cfg: GameConfig, prices: Sequence[int],
                           realized_prefix: Sequence[int],
                           cap: int = 10_000_000) -> CompletionResult:
    """Exact maximizer by enumerating every completion.

    Ties go to the lexicographically smallest completion (enumeration order
    over the ascending budget set guarantees it).
    """
    prices = validate_prices(cfg, prices, allow_partial=True)
    prefix = validate_budgets(cfg, realized_prefix, allow_partial=True)
    n = len(prices)
    ell = len(prefix)
    if ell > n:
        raise ValueError(f"prefix length {ell} exceeds sequence length {n}")
    open_slots = n - ell
    count = len(cfg.budget_set) ** open_slots
    if count > cap:
        raise CompletionTooLargeError(
            f"{count} completions exceed cap {cap}; shrink the instance or raise cap")

    best = None
    best_seq = None
    for tail in itertools.product(cfg.budget_set, repeat=open_slots):
        seq = prefix + tail
        g = gap(cfg, seq, prices)
        if best is None or g > best:
            best = g
            best_seq = seq
    return CompletionResult(gap=best, full_sequence=best_seq)
