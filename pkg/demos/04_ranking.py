"""Statistically rank competing treatments from repeated noisy measurements.

Raw means lie when the noise is large: sorting five treatments by mean will
happily order two samples drawn from the same distribution. The ranking here
only splits groups when a bootstrap test AND a Cliff's delta effect-size
gate both agree the gap is real, so statistically indistinguishable
treatments share a rank.

    python3 demos/04_ranking.py
"""

import random

from monopart import SampleSet, scott_knott

rng = random.Random(2024)


def noisy(label, center, spread=0.6, n=12):
    return SampleSet(label, tuple(rng.gauss(center, spread) for _ in range(n)))


# Three tiers: "fast_a" and "fast_b" are the same underlying quality, "mid"
# is slightly worse, and "slow" is clearly worst.
samples = [
    noisy("fast_a", 1.0),
    noisy("fast_b", 1.0),
    noisy("mid", 2.2),
    noisy("slow", 6.0),
]

table = scott_knott(samples, direction="minimize", seed=0)

print(f"{'treatment':<10}{'mean':>8}{'rank':>6}")
for sample in sorted(samples, key=lambda s: s.mean()):
    print(f"{sample.label:<10}{sample.mean():>8.3f}{table.ranks[sample.label]:>6}")

print()
print(f"rank-1 treatments: {sorted(table.winners())}")
print("fast_a and fast_b share rank 1: their gap is noise, not signal.")

# The same machinery handles metrics where bigger is better; direction
# "maximize" is the exact dual of negating every value.
quality = [
    noisy("tool_x", 0.90, spread=0.02),
    noisy("tool_y", 0.91, spread=0.02),
    noisy("tool_z", 0.70, spread=0.02),
]
up = scott_knott(quality, direction="maximize", seed=1)
print()
print(f"maximize ranks: { {s.label: up.ranks[s.label] for s in quality} }")
