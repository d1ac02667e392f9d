"""
Classical pricing rules and their worst enemies
===============================================

Three textbook baselines play the allocation game: greedy (price at the
floor), a deterministic threshold that climbs as stock depletes, and a
randomized flat threshold drawn from a doubling ladder. Each rule comes
with its own adversarial construction, so worst-case competitive ratios
are computed, not estimated.
"""
import numpy as np

from advalloc import (BaselineParams, GameConfig, ThresholdPolicy,
                      default_policies, doubling_ladder, evaluate_policies,
                      play_protocol, threshold_price, worst_case_for_threshold)

cfg = GameConfig(n_users=12, n_resources=3, price_set=(1, 2, 4, 8, 16),
                 budget_set=(1, 2, 4, 8, 16))
params = BaselineParams.from_config(cfg)

# The deterministic threshold exponentiates utilization: L/e at full
# stock, exactly U when the last unit is on the line.
print("threshold schedule by units sold:")
for sold in range(cfg.n_resources + 1):
    z = sold / cfg.n_resources
    print(f"  {sold} sold -> price {threshold_price(params, z):8.3f}")

# Its tailored worst case starves every price it can and force-feeds the
# ones it cannot, then pads with rich users once the stock is gone.
attack = worst_case_for_threshold(ThresholdPolicy(), cfg)
welfare, gap_value = play_protocol(cfg, ThresholdPolicy(), attack)
print("\nworst case for the threshold rule:", attack)
print(f"welfare {welfare}, benchmark {welfare + gap_value}, "
      f"ratio {(welfare + gap_value) / welfare:.3f}")

# The randomized rule spreads one threshold draw over the doubling
# ladder; its ratio is an exact expectation, no sampling involved.
print("\ndoubling ladder:", doubling_ladder(cfg))

# Side-by-side table, worst case first, then average-case play on shared
# uniform random sequences (the ratio column only means something against
# a worst case, so random mode leaves it out).
print(f"\n{'policy':<12} {'mode':<8} {'cr':>8} {'welfare':>9} {'gap':>7}")
for mode in ("worst", "random"):
    for row in evaluate_policies(cfg, default_policies(), mode=mode,
                                 n_sequences=500, seed=4):
        cr = "" if row.cr is None else f"{row.cr:.3f}"
        print(f"{row.policy:<12} {row.mode:<8} {cr:>8} "
              f"{row.mean_welfare:>9.2f} {row.mean_gap:>7.2f}")

# Greedy's worst case is the crudest: burn the stock at the floor price,
# then parade the rich. With N >= 2R its ratio is exactly U/L.
print(f"\ngreedy worst-case ratio equals U/L = "
      f"{cfg.upper_bound / cfg.lower_bound:.1f} whenever the sequence "
      f"has room for {cfg.n_resources} cheap and {cfg.n_resources} rich users")

# Randomization helps: the adversary cannot aim at a threshold it cannot
# predict, so the expected ratio stays below the deterministic one even
# though both rules quote from the same price range.
worst = {r.policy: r.cr for r in
         evaluate_policies(cfg, default_policies(), mode="worst", seed=4)}
print(f"deterministic threshold cr {worst['threshold']:.2f} vs "
      f"randomized cr {worst['randomized']:.2f} "
      f"({int(np.log2(cfg.upper_bound / cfg.lower_bound)) + 1} ladder levels)")
