"""Compiled inner loops for bias propagation.

All messages are biases in [-1, 1]. Bit-side products run over the two
factors ``1 + S`` and ``1 - S`` with prefix/suffix passes so that excluding
one edge needs no division; the computation is exactly odd in the inputs.
Bits whose degree exceeds ``_PRODUCT_MAX_DEGREE`` use log-magnitudes instead,
since ``(1 - S)`` may be as small as ``clamp_eps`` and the plain product
would underflow.
"""

import math

import numpy as np
from numba import njit

_PRODUCT_MAX_DEGREE = 40


@njit(cache=True, nogil=True, inline="always")
def _clamp(x, lim):
    if x > lim:
        return lim
    if x < -lim:
        return -lim
    return x


@njit(cache=True, nogil=True, inline="always")
def _odd_tanh(x):
    t = math.tanh(abs(x))
    return t if x >= 0.0 else -t


@njit(cache=True, nogil=True, inline="always")
def _damp(b_new, b_prev, lim):
    p = math.sqrt((1.0 + b_new) * (1.0 + b_prev))
    q = math.sqrt((1.0 - b_new) * (1.0 - b_prev))
    return _clamp((p - q) / (p + q), lim)


@njit(cache=True, nogil=True)
def _bit_phase(bit_ptr, bit_edges, active_bit, Sb, B, damping, lim, bp, bm):
    m = bit_ptr.size - 1
    for i in range(m):
        if not active_bit[i]:
            continue
        lo = bit_ptr[i]
        hi = bit_ptr[i + 1]
        if hi - lo <= _PRODUCT_MAX_DEGREE:
            pp = 1.0
            pm = 1.0
            for k in range(lo, hi):
                bp[k] = pp
                bm[k] = pm
                s = Sb[k]
                pp *= 1.0 + s
                pm *= 1.0 - s
            pp = 1.0
            pm = 1.0
            for k in range(hi - 1, lo - 1, -1):
                e = bit_edges[k]
                xp = bp[k] * pp
                xm = bm[k] * pm
                b = _clamp((xp - xm) / (xp + xm), lim)
                if damping:
                    b = _damp(b, B[e], lim)
                B[e] = b
                s = Sb[k]
                pp *= 1.0 + s
                pm *= 1.0 - s
        else:
            tot = 0.0
            for k in range(lo, hi):
                s = Sb[k]
                bp[k] = math.log1p(s) - math.log1p(-s)
                tot += bp[k]
            for k in range(lo, hi):
                e = bit_edges[k]
                b = _clamp(_odd_tanh(0.5 * (tot - bp[k])), lim)
                if damping:
                    b = _damp(b, B[e], lim)
                B[e] = b


@njit(cache=True, nogil=True)
def _check_phase(check_ptr, edge_bit, edge_pos, active_bit, active_check, src, Sb, B, lim, buf):
    n = check_ptr.size - 1
    for a in range(n):
        if not active_check[a]:
            continue
        lo = check_ptr[a]
        hi = check_ptr[a + 1]
        acc = src[a]
        for e in range(lo, hi):
            if active_bit[edge_bit[e]]:
                buf[e] = acc
                acc *= B[e]
        acc = 1.0
        for e in range(hi - 1, lo - 1, -1):
            if active_bit[edge_bit[e]]:
                Sb[edge_pos[e]] = _clamp(buf[e] * acc, lim)
                acc *= B[e]


@njit(cache=True, nogil=True)
def _final_biases(bit_ptr, active_bit, Sb, lim, out):
    m = bit_ptr.size - 1
    for i in range(m):
        if not active_bit[i]:
            out[i] = 0.0
            continue
        lo = bit_ptr[i]
        hi = bit_ptr[i + 1]
        if hi - lo <= _PRODUCT_MAX_DEGREE:
            pp = 1.0
            pm = 1.0
            for k in range(lo, hi):
                s = Sb[k]
                pp *= 1.0 + s
                pm *= 1.0 - s
            out[i] = _clamp((pp - pm) / (pp + pm), lim)
        else:
            tot = 0.0
            for k in range(lo, hi):
                s = Sb[k]
                tot += math.log1p(s) - math.log1p(-s)
            out[i] = _clamp(_odd_tanh(0.5 * tot), lim)


@njit(cache=True, nogil=True)
def run_iterations(
    check_ptr, edge_bit, edge_pos, bit_ptr, bit_edges,
    active_bit, active_check, src, Sb, B,
    max_iter, start_damp, lim, out,
):
    """``max_iter`` flooding iterations followed by the final biases.

    ``Sb`` holds check-to-bit messages in bit-major order (``Sb[k]`` belongs
    to edge ``bit_edges[k]``); ``B`` holds bit-to-check messages by edge id.
    ``edge_pos`` inverts ``bit_edges``. Both message arrays are updated in
    place; ``out`` receives the final bias of every bit (0 for fixed bits).
    """
    E = edge_bit.size
    bp = np.empty(E)
    bm = np.empty(E)
    for it in range(1, max_iter + 1):
        _bit_phase(bit_ptr, bit_edges, active_bit, Sb, B, it >= start_damp, lim, bp, bm)
        _check_phase(check_ptr, edge_bit, edge_pos, active_bit, active_check, src, Sb, B, lim, bp)
    _final_biases(bit_ptr, active_bit, Sb, lim, out)
