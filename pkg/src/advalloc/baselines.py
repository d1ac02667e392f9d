"""Classical posted-price baselines and their worst-case sequence builders.

Every policy speaks one streaming protocol: start(cfg, rng) returns per-run
state, price(state) posts the slot's price (floats allowed; thresholds are
not snapped to the price grid), observe(state, budget, accepted) reveals the
outcome. Acceptance is budget >= price while resources remain, and welfare
counts accepted budgets, so competitive ratios divide the offline benchmark
by realized welfare.

Worst cases: deterministic threshold policies get the drive-then-starve
construction (force accepts at the cheapest grid budget, then feed budgets
just under the final price); the randomized policy gets the doubling ladder
scored in exact expectation over its threshold draw; a learned policy is
attacked by sampling its trained opponent's snapshots. Anything following
the protocol (an externally implemented optimal-threshold rule, for
instance) plugs into the same evaluation; none is special-cased.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np

from .game import GameConfig, benchmark_rows
from .nets import AdversaryPolicy, AlgorithmPolicy, sample_categorical
from .rng import derive_rng
from .training import PolicyRollout, SnapshotRing

RESULTS_HEADER = ("policy", "mode", "cr", "mean_welfare", "mean_gap")
EVAL_MODES = ("worst", "random")


@dataclasses.dataclass(frozen=True)
class BaselineParams:
    """Budget bounds driving the threshold rules."""

    upper: float
    lower: float

    def __post_init__(self):
        if not self.upper >= self.lower > 0:
            raise ValueError(f"need U >= L > 0, got U={self.upper}, L={self.lower}")

    @classmethod
    def from_config(cls, cfg: GameConfig) -> "BaselineParams":
        return cls(upper=float(cfg.upper_bound), lower=float(cfg.lower_bound))


def threshold_price(params: BaselineParams, z: float) -> float:
    """(U e / L)^z * (L / e): L/e when untouched, exactly U when exhausted."""
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"utilization z must lie in [0, 1], got {z}")
    u, low = params.upper, params.lower
    return (u * math.e / low) ** z * (low / math.e)


def doubling_levels(params: BaselineParams) -> int:
    """Number of thresholds L*2^i, i in [0, floor(log2(U/L))] inclusive."""
    return int(math.floor(math.log2(params.upper / params.lower) + 1e-12)) + 1


@dataclasses.dataclass
class _RunState:
    y: int
    threshold: float = 0.0
    rollout: PolicyRollout | None = None
    params: BaselineParams | None = None
    n_resources: int = 0


class GreedyPolicy:
    """Posts the lowest budget value, accepting everyone while units remain."""

    name = "greedy"

    def start(self, cfg: GameConfig, rng=None) -> _RunState:
        return _RunState(y=cfg.n_resources, threshold=float(cfg.lower_bound))

    def price(self, state: _RunState) -> float:
        return state.threshold

    def observe(self, state: _RunState, budget: int, accepted: bool) -> None:
        state.y -= bool(accepted)

    def worst_case(self, cfg: GameConfig) -> tuple[int, ...]:
        return worst_case_for_threshold(self, cfg)


class ThresholdPolicy:
    """Deterministic rule pricing at (U e / L)^z (L / e) for utilization z."""

    name = "threshold"

    def start(self, cfg: GameConfig, rng=None) -> _RunState:
        return _RunState(y=cfg.n_resources, params=BaselineParams.from_config(cfg),
                         n_resources=cfg.n_resources)

    def price(self, state: _RunState) -> float:
        z = (state.n_resources - state.y) / state.n_resources
        return threshold_price(state.params, z)

    def observe(self, state: _RunState, budget: int, accepted: bool) -> None:
        state.y -= bool(accepted)

    def worst_case(self, cfg: GameConfig) -> tuple[int, ...]:
        return worst_case_for_threshold(self, cfg)


class RandomizedPolicy:
    """Per-sequence threshold L*2^i with i drawn uniformly from the levels."""

    name = "randomized"

    def start(self, cfg: GameConfig, rng: np.random.Generator) -> _RunState:
        params = BaselineParams.from_config(cfg)
        i = int(rng.integers(doubling_levels(params)))
        return _RunState(y=cfg.n_resources, threshold=params.lower * 2.0 ** i)

    def price(self, state: _RunState) -> float:
        return state.threshold

    def observe(self, state: _RunState, budget: int, accepted: bool) -> None:
        state.y -= bool(accepted)

    def worst_case(self, cfg: GameConfig) -> tuple[int, ...]:
        return doubling_ladder(cfg)


class LearnedPolicy:
    """Trained pricing network behind the protocol; decodes by argmax unless
    sampling is requested. An attached opponent sampler supplies worst-case
    candidate sequences drawn from trained generator snapshots."""

    name = "learned"

    def __init__(self, policy: AlgorithmPolicy, *, sample: bool = False,
                 opponent_sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None):
        self.policy = policy
        self.sample = sample
        self.opponent_sampler = opponent_sampler

    def start(self, cfg: GameConfig, rng=None) -> _RunState:
        rollout = PolicyRollout(cfg, self.policy, rng=rng, sample=self.sample)
        return _RunState(y=cfg.n_resources, rollout=rollout)

    def price(self, state: _RunState) -> float:
        return float(state.rollout.price())

    def observe(self, state: _RunState, budget: int, accepted: bool) -> None:
        state.rollout.observe(budget, accepted)
        state.y -= bool(accepted)


def snapshot_sequence_sampler(cfg: GameConfig, adversary: AdversaryPolicy,
                              ring: SnapshotRing):
    """Budget-row sampler that loads a uniformly drawn snapshot per sequence."""
    budget_arr = np.asarray(cfg.budget_set, dtype=np.int64)

    def draw(rng: np.random.Generator, count: int) -> np.ndarray:
        rows = np.empty((count, cfg.n_users), dtype=np.int64)
        for j in range(count):
            adversary.set_params(ring.sample(rng).params)
            probs, _ = adversary.forward(rng.normal(size=(1, adversary.latent_dim)))
            rows[j] = budget_arr[sample_categorical(rng, probs)[0]]
        return rows

    return draw


def play_protocol(cfg: GameConfig, policy, budgets: Sequence[int],
                  rng: np.random.Generator | None = None):
    """One sequence through the streaming protocol; returns (welfare, gap)."""
    state = policy.start(cfg, rng)
    y = cfg.n_resources
    welfare = 0
    for b in budgets:
        p = policy.price(state)
        take = y > 0 and b >= p
        policy.observe(state, int(b), bool(take))
        if take:
            welfare += int(b)
            y -= 1
    bench = int(benchmark_rows(np.asarray(budgets, dtype=np.int64)[None, :],
                               cfg.n_resources)[0])
    return welfare, bench - welfare


def competitive_ratio(benchmark: float, welfare: float) -> float:
    """Benchmark over welfare; infinity flags a starved run."""
    if welfare <= 0:
        return math.inf
    return benchmark / welfare


def _snap_up(grid: Sequence[int], price: float) -> int | None:
    for g in grid:
        if g >= price:
            return g
    return None


def _snap_down_strict(grid: Sequence[int], price: float) -> int | None:
    best = None
    for g in grid:
        if g < price:
            best = g
    return best


def worst_case_for_threshold(policy, cfg: GameConfig) -> tuple[int, ...]:
    """Adversarial sequence for a deterministic threshold-style policy.

    For each target utilization t in 1..R: force t accepts at the cheapest
    grid budget the posted price admits, then starve the remaining slots
    with the largest grid budget strictly below the running price maximum
    (or the top budget once nothing can be accepted). Returns the
    max-competitive-ratio candidate; infeasible targets are skipped.
    """
    grid = cfg.budget_set
    best_seq = None
    best_cr = -math.inf
    for target in range(1, cfg.n_resources + 1):
        state = policy.start(cfg, None)
        seq: list[int] = []
        accepts = 0
        p_star = -math.inf
        feasible = True
        for _ in range(cfg.n_users):
            price = policy.price(state)
            p_star = max(p_star, price)
            if accepts < target:
                b = _snap_up(grid, price)
            elif accepts >= cfg.n_resources:
                b = grid[-1]
            else:
                b = _snap_down_strict(grid, p_star)
            if b is None:
                feasible = False
                break
            take = accepts < cfg.n_resources and b >= price
            policy.observe(state, b, take)
            seq.append(b)
            accepts += take
        if not feasible:
            continue
        welfare, gap_value = play_protocol(cfg, policy, seq)
        cr = competitive_ratio(welfare + gap_value, welfare)
        if cr > best_cr:
            best_cr = cr
            best_seq = tuple(seq)
    if best_seq is None:
        # the policy prices everything off the grid; any sequence starves it
        return (grid[-1],) * cfg.n_users
    return best_seq


def doubling_ladder(cfg: GameConfig) -> tuple[int, ...]:
    """Gradually increasing budgets: R copies of each snapped threshold level,
    topped up with the largest budget."""
    params = BaselineParams.from_config(cfg)
    seq: list[int] = []
    for i in range(doubling_levels(params)):
        snapped = _snap_up(cfg.budget_set, params.lower * 2.0 ** i)
        if snapped is not None:
            seq.extend([snapped] * cfg.n_resources)
    seq.extend([cfg.budget_set[-1]] * cfg.n_users)
    return tuple(seq[:cfg.n_users])


def randomized_worst_case_cr(cfg: GameConfig) -> tuple[float, float, float]:
    """Exact expected performance of the randomized rule on the ladder.

    Returns (cr, expected welfare, expected gap) with the expectation taken
    over the uniform threshold draw, not Monte-Carlo.
    """
    params = BaselineParams.from_config(cfg)
    ladder = doubling_ladder(cfg)
    levels = doubling_levels(params)
    welfare_sum = 0.0
    for i in range(levels):
        threshold = params.lower * 2.0 ** i
        y = cfg.n_resources
        for b in ladder:
            if y > 0 and b >= threshold:
                welfare_sum += b
                y -= 1
    bench = int(benchmark_rows(np.asarray(ladder, dtype=np.int64)[None, :],
                               cfg.n_resources)[0])
    mean_welfare = welfare_sum / levels
    return competitive_ratio(bench, mean_welfare), mean_welfare, bench - mean_welfare


def random_sequences(cfg: GameConfig, rng: np.random.Generator,
                     count: int) -> np.ndarray:
    """Uniform i.i.d. grid budgets, (count, n_users)."""
    idx = rng.integers(cfg.n_budgets, size=(count, cfg.n_users))
    return np.asarray(cfg.budget_set, dtype=np.int64)[idx]


@dataclasses.dataclass(frozen=True)
class EvalRow:
    policy: str
    mode: str
    cr: float | None
    mean_welfare: float
    mean_gap: float


def _worst_row(cfg: GameConfig, name: str, policy, rng: np.random.Generator,
               n_candidates: int) -> EvalRow:
    if isinstance(policy, RandomizedPolicy):
        cr, welfare, gap_value = randomized_worst_case_cr(cfg)
        return EvalRow(name, "worst", cr, welfare, gap_value)
    sampler = getattr(policy, "opponent_sampler", None)
    if sampler is not None:
        candidates = sampler(rng, n_candidates)
    elif hasattr(policy, "worst_case"):
        candidates = np.asarray(policy.worst_case(cfg), dtype=np.int64)[None, :]
    else:
        candidates = random_sequences(cfg, rng, n_candidates)
    best = None
    for row in candidates:
        welfare, gap_value = play_protocol(cfg, policy, [int(v) for v in row], rng)
        cr = competitive_ratio(welfare + gap_value, welfare)
        key = (cr, gap_value)
        if best is None or key > best[0]:
            best = (key, welfare, gap_value)
    (cr, _), welfare, gap_value = best
    return EvalRow(name, "worst", cr, float(welfare), float(gap_value))


def evaluate_policies(cfg: GameConfig, policies, *, mode: str,
                      n_sequences: int = 1000, seed: int = 0) -> list[EvalRow]:
    """Score named policies in one mode.

    worst: each policy's adversarial construction (exact expectation for the
    randomized rule, snapshot attack candidates for a learned policy);
    rows carry the achieved competitive ratio.
    random: welfare and gap averaged over shared uniform sequences; the
    competitive-ratio column is left empty.
    """
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}, got {mode!r}")
    named = list(policies.items()) if isinstance(policies, dict) else \
        [(p.name, p) for p in policies]
    rows: list[EvalRow] = []
    if mode == "worst":
        for name, policy in named:
            rng = derive_rng(seed, f"eval:worst:{name}")
            rows.append(_worst_row(cfg, name, policy, rng, n_sequences))
        return rows
    shared = random_sequences(cfg, derive_rng(seed, "eval:sequences"), n_sequences)
    for name, policy in named:
        rng = derive_rng(seed, f"eval:random:{name}")
        welfare_total = 0.0
        gap_total = 0.0
        for row in shared:
            welfare, gap_value = play_protocol(cfg, policy, [int(v) for v in row], rng)
            welfare_total += welfare
            gap_total += gap_value
        rows.append(EvalRow(name, "random", None, welfare_total / n_sequences,
                            gap_total / n_sequences))
    return rows


def default_policies() -> dict[str, object]:
    """The three classical baselines; learned policies are added by callers."""
    return {
        "greedy": GreedyPolicy(),
        "threshold": ThresholdPolicy(),
        "randomized": RandomizedPolicy(),
    }
