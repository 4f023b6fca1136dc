"""Bias propagation with decimation.

The quantizer runs in rounds. Each round executes ``max_iter`` message
passing iterations (bits first, then checks) on the residual graph, fixes
the most biased bits, and folds their values into the residual source.
Satisfaction messages carry over from one round to the next.

The scalar functions ``source_message`` ... ``final_bias`` are the update
rules written out plainly; the round driver uses compiled equivalents from
:mod:`bipquant._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .distortion import Profile, as_profile, weighted_distortion
from .graph import FactorGraph, ResidualState, decimate, encode

__all__ = [
    "BipParams",
    "MessageState",
    "RoundReport",
    "QuantizationResult",
    "source_message",
    "bit_update",
    "damp",
    "check_update",
    "final_bias",
    "select_fixes",
    "run_round",
    "quantize",
    "quantize_single_round",
    "propagate",
    "GAMMA_BY_RATE",
    "default_gamma",
]

DEFAULT_CLAMP_EPS = 1e-7

# uniform check strengths that work well for the shipped degree pairs
GAMMA_BY_RATE = {0.37: 0.8, 0.5: 1.07, 0.65: 1.3, 0.75: 1.5}


def default_gamma(rate: float) -> float:
    """Strength tabulated for the shipped rate closest to ``rate``."""
    return GAMMA_BY_RATE[min(GAMMA_BY_RATE, key=lambda r: (abs(r - rate), r))]


@dataclass(frozen=True, eq=False)
class BipParams:
    gamma: np.ndarray
    t: float = 0.8
    max_iter: int = 25
    start_damp: int = 10
    num_min: int = 1
    num_max: int = 1
    clamp_eps: float = DEFAULT_CLAMP_EPS

    def __post_init__(self):
        g = np.array(self.gamma, dtype=np.float64).reshape(-1)
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)
        if not 0.0 < self.t < 1.0:
            raise ValueError("t must lie in (0, 1)")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        if int(self.num_min) < 1 or int(self.num_max) < int(self.num_min):
            raise ValueError("need 1 <= num_min <= num_max")
        if not 0.0 < self.clamp_eps < 1e-3:
            raise ValueError("clamp_eps must lie in (0, 1e-3)")
        if g.size == 0 or not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gamma must be finite and >= 0")

    @classmethod
    def for_graph(
        cls,
        graph: FactorGraph,
        gamma,
        *,
        t: float = 0.8,
        max_iter: int = 25,
        start_damp: int = 10,
        num_min_frac: float = 0.001,
        num_max_frac: float = 0.01,
        clamp_eps: float = DEFAULT_CLAMP_EPS,
    ) -> "BipParams":
        """Parameters with the per-round bit counts taken as fractions of ``graph.m``."""
        if num_min_frac > num_max_frac:
            raise ValueError("num_min_frac must not exceed num_max_frac")
        g = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (graph.n,))
        return cls(
            gamma=g,
            t=t,
            max_iter=max_iter,
            start_damp=start_damp,
            num_min=fraction_to_count(num_min_frac, graph.m),
            num_max=fraction_to_count(num_max_frac, graph.m),
            clamp_eps=clamp_eps,
        )

    def replace(self, **changes) -> "BipParams":
        kw = dict(
            gamma=self.gamma, t=self.t, max_iter=self.max_iter, start_damp=self.start_damp,
            num_min=self.num_min, num_max=self.num_max, clamp_eps=self.clamp_eps,
        )
        kw.update(changes)
        return BipParams(**kw)

    def check_against(self, graph: FactorGraph) -> None:
        if self.gamma.size != graph.n:
            raise ValueError(f"gamma has length {self.gamma.size}, graph has {graph.n} checks")
        if self.num_max > graph.m:
            raise ValueError(f"num_max={self.num_max} exceeds m={graph.m}")


def fraction_to_count(frac: float, m: int) -> int:
    """``ceil(frac * m)`` clipped to ``[1, m]``; tolerant of float noise."""
    return int(min(max(math.ceil(frac * m - 1e-9), 1), m))


@dataclass
class MessageState:
    """Per-edge messages.

    ``B[e]`` is the bit-to-check bias on edge ``e``. ``S`` holds the
    check-to-bit satisfactions in bit-major order: ``S[k]`` belongs to edge
    ``graph.bit_edges[k]`` (use :meth:`satisfaction_by_edge` for edge order).
    ``src`` is the per-check source message of the current round.
    """

    S: np.ndarray
    B: np.ndarray
    src: np.ndarray

    @classmethod
    def initial(cls, graph: FactorGraph, state: ResidualState, params: BipParams) -> "MessageState":
        src = source_messages(state.residual_source, params.gamma, params.clamp_eps)
        return cls(
            S=src[graph.edge_check[graph.bit_edges]],
            B=np.zeros(graph.num_edges),
            src=src,
        )

    def satisfaction_by_edge(self, graph: FactorGraph) -> np.ndarray:
        return self.S[graph.edge_pos]


@dataclass(frozen=True)
class RoundReport:
    round: int
    bits_fixed: int
    max_abs_bias: float
    converged: bool
    min_fixed_bias: float = 0.0  # smallest |B_i| among the bits fixed this round


@dataclass
class QuantizationResult:
    w: np.ndarray
    c: np.ndarray
    distortion: float
    rounds: list[RoundReport] = field(default_factory=list)
    iterations_total: int = 0

    @property
    def converged(self) -> bool:
        """True when every round had at least one bit above the threshold."""
        return all(r.converged for r in self.rounds)


# -- scalar update rules ------------------------------------------------------


def _clamp(x: float, eps: float) -> float:
    lim = 1.0 - eps
    return min(max(x, -lim), lim)


def source_message(s_a: int, gamma_a: float, clamp_eps: float = DEFAULT_CLAMP_EPS) -> float:
    """``(-1)^s_a tanh(gamma_a)``."""
    v = math.tanh(gamma_a)
    return _clamp(-v if s_a else v, clamp_eps)


def source_messages(s, gamma, clamp_eps: float = DEFAULT_CLAMP_EPS) -> np.ndarray:
    lim = 1.0 - clamp_eps
    v = np.minimum(np.tanh(np.asarray(gamma, dtype=np.float64)), lim)
    return np.where(np.asarray(s) != 0, -v, v)


def bit_update(incoming: Sequence[float], clamp_eps: float = DEFAULT_CLAMP_EPS) -> float:
    """Bias of a bit from the satisfactions of its other checks."""
    plus = math.prod(1.0 + x for x in incoming)
    minus = math.prod(1.0 - x for x in incoming)
    return _clamp((plus - minus) / (plus + minus), clamp_eps)


def damp(b_new: float, b_prev: float, clamp_eps: float = DEFAULT_CLAMP_EPS) -> float:
    """Average two biases in the ``atanh`` domain."""
    return _clamp(math.tanh(0.5 * (math.atanh(b_new) + math.atanh(b_prev))), clamp_eps)


def check_update(incoming: Sequence[float], source_msg: float,
                 clamp_eps: float = DEFAULT_CLAMP_EPS) -> float:
    return _clamp(source_msg * math.prod(incoming), clamp_eps)


def final_bias(incoming: Sequence[float], clamp_eps: float = DEFAULT_CLAMP_EPS) -> float:
    """Same product form as :func:`bit_update`, over every check of the bit."""
    return bit_update(incoming, clamp_eps)


def select_fixes(biases: np.ndarray, active: np.ndarray, params: BipParams) -> list[tuple[int, int]]:
    """Pick bits to fix: every bit at or above ``t``, bounded to ``[num_min, num_max]``.

    Bits are ranked by ``|B_i|`` (ties to the lower index); a bit is fixed to
    0 when its bias is positive and to 1 otherwise.
    """
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return []
    mag = np.abs(biases[idx])
    order = idx[np.argsort(-mag, kind="stable")]
    q = int(np.count_nonzero(mag >= params.t))
    k = min(max(q, params.num_min), params.num_max, idx.size)
    chosen = order[:k]
    return [(int(i), 0 if biases[i] > 0 else 1) for i in chosen]


# -- rounds -------------------------------------------------------------------


def run_round(
    graph: FactorGraph,
    state: ResidualState,
    msgs: MessageState,
    params: BipParams,
    round_index: int,
) -> tuple[RoundReport, list[tuple[int, int]], np.ndarray]:
    """One round: message passing on the residual graph, then bit selection.

    Returns the report, the chosen fixes, and the final biases (0 for bits
    already fixed). ``msgs`` is updated in place; ``state`` is not touched.
    """
    msgs.src = source_messages(state.residual_source, params.gamma, params.clamp_eps)
    biases = np.zeros(graph.m)
    _kernels.run_iterations(
        graph.check_ptr, graph.edge_bit, graph.edge_pos, graph.bit_ptr, graph.bit_edges,
        state.active_bit, state.active_check, msgs.src, msgs.S, msgs.B,
        int(params.max_iter), int(params.start_damp), 1.0 - params.clamp_eps, biases,
    )
    fixes = select_fixes(biases, state.active_bit, params)
    live = np.abs(biases[state.active_bit])
    top = float(live.max()) if live.size else 0.0
    low = float(min(abs(biases[i]) for i, _ in fixes)) if fixes else 0.0
    report = RoundReport(round_index, len(fixes), top, top > params.t, low)
    return report, fixes, biases


def propagate(graph: FactorGraph, s, params: BipParams) -> np.ndarray:
    """Final biases after a single round from fresh messages (no decimation)."""
    params.check_against(graph)
    state = ResidualState.initial(graph, s)
    msgs = MessageState.initial(graph, state, params)
    return run_round(graph, state, msgs, params, 1)[2]


def quantize(graph: FactorGraph, s, params: BipParams, profile: Profile | None = None,
             ) -> QuantizationResult:
    """Quantize source ``s`` to a codeword of ``graph``."""
    params.check_against(graph)
    state = ResidualState.initial(graph, s)
    s0 = state.residual_source.copy()
    msgs = MessageState.initial(graph, state, params)
    w = np.zeros(graph.m, dtype=np.uint8)
    reports = []
    r = 0
    while state.num_active_bits:
        r += 1
        report, fixes, _ = run_round(graph, state, msgs, params, r)
        reports.append(report)
        for i, v in fixes:
            w[i] = v
        decimate(state, graph, fixes)
    c = encode(graph, w)
    prof = as_profile(profile, graph.n)
    return QuantizationResult(
        w=w,
        c=c,
        distortion=weighted_distortion(s0, c, prof),
        rounds=reports,
        iterations_total=r * params.max_iter,
    )


def quantize_single_round(graph: FactorGraph, s, params: BipParams,
                          profile: Profile | None = None) -> QuantizationResult:
    """One round of message passing, then every bit is fixed by its sign."""
    return quantize(graph, s, params.replace(num_min=graph.m, num_max=graph.m), profile)
