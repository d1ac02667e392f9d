"""
Posted prices, budgets, and the offline benchmark
=================================================

One pass through the allocation game: a seller holds R identical units,
users arrive one at a time, each sees a posted price and buys whenever
their budget covers it and stock remains. Welfare counts the budgets of
the buyers; the offline benchmark is the best the seller could have done
knowing the whole sequence (sell to the R richest users).
"""
import numpy as np

from advalloc import GameConfig, benchmark, simulate

cfg = GameConfig(n_users=6, n_resources=2, price_set=(1, 2, 4, 8),
                 budget_set=(1, 2, 4, 8))
rich = (2, 8, 1, 4, 8, 4)

# The hindsight optimum ignores prices entirely: pick the two largest budgets.
best, winners = benchmark(cfg, rich)
print("budgets:        ", rich)
print("benchmark value:", best, "selling to slots",
      [i for i, take in enumerate(winners) if take])

# A flat low price sells out immediately to whoever shows up first.
trace = simulate(cfg, rich, prices=(1,) * 6)
print("\nflat price 1 -> accepted", trace.accepted,
      "welfare", trace.alg_welfare, "gap", trace.gap)

# Pricing at 8 filters for the two rich users and meets the benchmark.
trace = simulate(cfg, rich, prices=(8,) * 6)
print("flat price 8 -> accepted", trace.accepted,
      "welfare", trace.alg_welfare, "gap", trace.gap)

# But the same high price starves on a sequence with no rich users at all.
# This is the tension an adversary exploits: any fixed schedule is either
# too cheap for rich traffic or too greedy for poor traffic.
poor = (2, 4, 1, 4, 4, 2)
for flat in (1, 8):
    trace = simulate(cfg, poor, prices=(flat,) * 6)
    print(f"\nbudgets {poor}, flat price {flat} -> welfare",
          trace.alg_welfare, "of benchmark", trace.benchmark_value,
          "(gap", str(trace.gap) + ")")

# Against an adversary that adapts, the relevant score of a schedule is its
# worst gap over every possible budget sequence. The vectorized grid scores
# all 4096 x 4096 pairings at once: no deterministic schedule is safe.
from advalloc import benchmark_rows, welfare_grid

grid = np.array(np.meshgrid(*[cfg.price_set] * cfg.n_users)).T.reshape(-1, 6)
gaps = benchmark_rows(grid, cfg.n_resources)[:, None] \
    - welfare_grid(grid, grid, cfg.n_resources)
worst = gaps.max(axis=0)
i = int(worst.argmin())
print("\nbest deterministic schedule", tuple(int(p) for p in grid[i]),
      "still loses", int(worst[i]), "on its worst sequence;")
print("randomizing over schedules is what the equilibrium solvers are for.")
