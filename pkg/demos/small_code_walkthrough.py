"""Walk through quantization on the six-bit, three-check example code.

Run:  python3 demos/small_code_walkthrough.py
"""

import itertools

import numpy as np

from bipquant import BipParams, FactorGraph, encode, exact_distribution, exhaustive_quantize, propagate, quantize

# row a lists the checks feeding source bit a
ADJACENCY = [[0], [1], [0, 2], [0, 1, 2], [2], [2]]
g = FactorGraph.from_adjacency(3, ADJACENCY)
print(f"code: n={g.n} m={g.m} edges={g.num_edges}")

print("\nall codewords:")
for w in itertools.product([0, 1], repeat=g.m):
    print(f"  w={''.join(map(str, w))}  c={''.join(map(str, encode(g, np.array(w))))}")

s = np.array([1, 0, 1, 1, 0, 1])
gamma = 1.07
print(f"\nsource s={''.join(map(str, s))}, gamma={gamma}")

# bits 2 and 3 close a cycle through checks 0 and 2, so the biases are approximate
exact = exact_distribution(g, s, gamma)
bp = propagate(g, s, BipParams(np.full(g.n, gamma), max_iter=8, start_damp=100, clamp_eps=1e-12))
for i, (b, e) in enumerate(zip(bp, exact.gaps)):
    print(f"  check {i}: propagated bias {b:+.6f}  exact {e:+.6f}")

res = quantize(g, s, BipParams.for_graph(g, gamma))
w_opt, d_opt = exhaustive_quantize(g, s)
print(f"\nquantizer: w={''.join(map(str, res.w))} D={res.distortion:.4f} rounds={len(res.rounds)}")
print(f"optimum:   w={''.join(map(str, w_opt))} D={d_opt:.4f}")
