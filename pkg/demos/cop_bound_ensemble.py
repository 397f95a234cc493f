#!/usr/bin/env python3
"""Random-fridge ensemble against the 3/4-Carnot bound.

Draws random chillers (temperatures, frequencies, couplings and level count
all random), tunes each for maximum cooling power, and histograms the COP
at maximum power normalized by the Carnot value.  For a three-dimensional
bosonic cold bath every sample must stay below 3/4, and the best samples
crowd right up against it.

Pass a sample count to override the quick default:

    python demos/cop_bound_ensemble.py 2000
"""

import sys

import numpy as np

from qpump.experiments import SampleRanges, cop_histogram

n_samples = int(sys.argv[1]) if len(sys.argv) > 1 else 400

print(f"drawing {n_samples} random fridges (seeded, reproducible) ...")
result = cop_histogram(SampleRanges(seed=20240815), n_samples)
summary = result.summary(bins=30)

print(f"samples: {summary['count']}   rejected draws: {summary['rejected']}")
print(f"max eps*/eps_C:  {summary['max']:.4f}")
print(f"mean eps*/eps_C: {summary['mean']:.4f}")
print(f"samples at or above 3/4: {(result.eps_ratios >= 0.75).sum()}")
print()

counts = summary["bin_counts"]
edges = summary["bin_edges"]
peak = counts.max() or 1
for lo, hi, c in zip(edges[:-1], edges[1:], counts):
    bar = "#" * int(round(40 * c / peak))
    print(f"  {lo:5.3f}-{hi:5.3f} |{bar:<40}| {c}")
print(f"  {'':>11} ^ bound at 0.750")

by_n = {}
for ratio, n in zip(result.eps_ratios, result.n_levels):
    by_n.setdefault(int(n), []).append(ratio)
print()
print("max ratio per level count (the bound is size-independent):")
for n in sorted(by_n):
    print(f"  N={n:>2}: {max(by_n[n]):.4f}  ({len(by_n[n])} samples)")
