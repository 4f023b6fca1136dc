"""Compare the quantizer with exhaustive search on small random codes.

Run:  python3 demos/oracle_check.py
"""

import numpy as np

from bipquant import BipParams, exhaustive_quantize, parse_distribution, quantize, sample_graph

rng = np.random.default_rng(0)
# light degrees keep 16-bit codes well mixed
rho = parse_distribution("2 0.4\n3 0.6\n")
lam = parse_distribution("5 1.0\n")
gaps = []
for trial in range(20):
    g = sample_graph(32, 16, rho, lam, seed=trial)
    s = rng.integers(0, 2, g.n)
    _, d_opt = exhaustive_quantize(g, s)
    d = quantize(g, s, BipParams.for_graph(g, 1.07)).distortion
    gaps.append(d - d_opt)
    print(f"trial {trial:2d}: quantizer {d:.4f}  optimum {d_opt:.4f}")
print(f"mean excess distortion {np.mean(gaps):.4f}, never below optimum: {min(gaps) >= 0}")
