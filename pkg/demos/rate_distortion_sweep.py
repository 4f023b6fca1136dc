"""Mean distortion against the Shannon bound for the built-in degree pairs.

Run:  python3 demos/rate_distortion_sweep.py [n] [trials]
"""

import sys

import numpy as np

from bipquant import BUILTIN_RATES, BipParams, builtin_pair, default_gamma, run_bench, sample_graph, shannon_distortion

n = int(sys.argv[1]) if len(sys.argv) > 1 else 4000
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 5

print(f"{'rate':>6} {'gamma':>6} {'mean D':>8} {'bound':>8} {'gap':>8} {'bit/s':>9}")
for rate in BUILTIN_RATES:
    rho, lam = builtin_pair(rate)
    g = sample_graph(n, int(round(rate * n)), rho, lam, seed=1)
    gamma = default_gamma(rate)
    recs = run_bench(g, BipParams.for_graph(g, gamma), trials, seed=100)
    d = np.mean([r.distortion for r in recs])
    bps = np.mean([r.throughput_bps for r in recs])
    bound = shannon_distortion(rate)
    print(f"{rate:>6} {gamma:>6} {d:>8.4f} {bound:>8.4f} {d - bound:>8.4f} {bps:>9.0f}")
