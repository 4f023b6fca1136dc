"""Brute-force ground truth for small codes.

Every information word is visited in Gray-code order. Moving to the next
word flips one bit, which XORs one column of G into the running codeword,
so each step costs only that column's weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .distortion import as_profile, weighted_distortion
from .graph import FactorGraph, encode

__all__ = [
    "MAX_ORACLE_BITS",
    "OracleError",
    "ExactDistribution",
    "exhaustive_quantize",
    "exact_distribution",
    "word_probabilities",
]

MAX_ORACLE_BITS = 20
_RESYNC = 4096


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class ExactDistribution:
    log_z: float
    gaps: np.ndarray  # P(w_i = 0) - P(w_i = 1)


def _guard(graph: FactorGraph) -> None:
    if graph.m > MAX_ORACLE_BITS:
        raise OracleError(f"m={graph.m} exceeds the enumeration limit of {MAX_ORACLE_BITS} bits")


@njit(cache=True)
def _ctz(k):
    j = 0
    while (k & 1) == 0:
        k >>= 1
        j += 1
    return j


@njit(cache=True)
def _energy(mismatch, weights):
    e = 0.0
    for a in range(mismatch.size):
        if mismatch[a]:
            e += weights[a]
    return e


@njit(cache=True)
def _min_energy_word(bit_ptr, bit_edges, edge_check, s, weights, tol):
    """Smallest ``sum_a weights_a [c_a != s_a]``; ties go to the smallest big-endian word."""
    m = bit_ptr.size - 1
    mismatch = s.copy()
    w = np.zeros(m, dtype=np.uint8)
    energy = _energy(mismatch, weights)
    best = energy
    best_val = 0
    val = 0
    for k in range(1, 1 << m):
        j = _ctz(k)
        i = m - 1 - j  # bit i carries weight 2^(m-1-i)
        w[i] ^= 1
        val ^= 1 << j
        for p in range(bit_ptr[i], bit_ptr[i + 1]):
            a = edge_check[bit_edges[p]]
            if mismatch[a]:
                energy -= weights[a]
            else:
                energy += weights[a]
            mismatch[a] ^= 1
        if k % _RESYNC == 0:
            energy = _energy(mismatch, weights)
        if energy < best - tol or (energy <= best + tol and val < best_val):
            best = energy
            best_val = val
    return best_val


@njit(cache=True)
def _gibbs_scan(bit_ptr, bit_edges, edge_check, s, gamma, shift, z_one):
    """Sum of ``exp(-2 U(w) - shift)`` over all words, with per-bit sums where ``w_i = 1``.

    ``U(w) = sum_a gamma_a [c_a != s_a]``. Returns the total and the minimum
    of ``2 U`` seen, so a first pass with ``shift = 0`` can find the offset.
    """
    m = bit_ptr.size - 1
    mismatch = s.copy()
    w = np.zeros(m, dtype=np.uint8)
    u = _energy(mismatch, gamma)
    total = 0.0
    lowest = 2.0 * u
    for k in range(0, 1 << m):
        if k > 0:
            i = m - 1 - _ctz(k)
            w[i] ^= 1
            for p in range(bit_ptr[i], bit_ptr[i + 1]):
                a = edge_check[bit_edges[p]]
                if mismatch[a]:
                    u -= gamma[a]
                else:
                    u += gamma[a]
                mismatch[a] ^= 1
            if k % _RESYNC == 0:
                u = _energy(mismatch, gamma)
        if 2.0 * u < lowest:
            lowest = 2.0 * u
        p_w = math.exp(-2.0 * u + shift)
        total += p_w
        for b in range(m):
            if w[b]:
                z_one[b] += p_w
    return total, lowest


def exhaustive_quantize(graph: FactorGraph, s, profile=None) -> tuple[np.ndarray, float]:
    """Minimum-distortion information word over all ``2^m`` candidates."""
    _guard(graph)
    s = np.asarray(s, dtype=np.uint8)
    if s.size != graph.n:
        raise OracleError(f"source has length {s.size}, expected {graph.n}")
    weights = as_profile(profile, graph.n)
    tol = 1e-12 * max(float(weights.sum()), 1.0)
    val = _min_energy_word(graph.bit_ptr, graph.bit_edges, graph.edge_check, s.copy(), weights, tol)
    w = np.array([(val >> (graph.m - 1 - i)) & 1 for i in range(graph.m)], dtype=np.uint8)
    return w, weighted_distortion(s, encode(graph, w), weights)


def exact_distribution(graph: FactorGraph, s, gamma) -> ExactDistribution:
    """Exact log-partition function and per-bit marginal gaps.

    Word weights use the check-factor form: each check contributes
    ``e^{gamma_a}`` when satisfied and ``e^{-gamma_a}`` otherwise, so
    ``log w(w) = sum(gamma) - 2 U(w)``.
    """
    _guard(graph)
    s = np.asarray(s, dtype=np.uint8)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (graph.n,)).copy()
    if s.size != graph.n:
        raise OracleError(f"source has length {s.size}, expected {graph.n}")
    args = (graph.bit_ptr, graph.bit_edges, graph.edge_check, s.copy(), gamma)
    _, lowest = _gibbs_scan(*args, 0.0, np.zeros(graph.m))
    z_one = np.zeros(graph.m)
    total, _ = _gibbs_scan(*args, lowest, z_one)
    p_one = z_one / total
    log_z = float(gamma.sum()) - lowest + math.log(total)
    return ExactDistribution(log_z=log_z, gaps=1.0 - 2.0 * p_one)


def word_probabilities(graph: FactorGraph, s, gamma, form: str = "psi") -> np.ndarray:
    """Normalized probability of every word, evaluated directly from dense G.

    Row ``k`` is the word whose big-endian integer value is ``k``. ``form``
    selects the product of check factors (``"psi"``) or the exponent form
    ``e^{-2 <gamma, Gw - s>}`` (``"exponent"``); the two differ only by the
    constant ``e^{sum gamma}``.
    """
    _guard(graph)
    m = graph.m
    g = graph.to_dense().astype(np.int64)
    s = np.asarray(s, dtype=np.int64)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (graph.n,))
    words = (np.arange(1 << m)[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
    codes = (words @ g.T) & 1
    disagree = (codes != s[None, :]).astype(np.float64)
    if form == "psi":
        logw = (np.where(disagree > 0, -1.0, 1.0) * gamma).sum(axis=1)
    elif form == "exponent":
        logw = -2.0 * (disagree @ gamma)
    else:
        raise ValueError(f"unknown form {form!r}")
    logw -= logw.max()
    p = np.exp(logw)
    return p / p.sum()
