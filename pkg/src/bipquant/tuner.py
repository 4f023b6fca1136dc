"""Per-check strength calibration for non-uniform profiles.

Starting from a uniform γ, repeatedly quantize random sources, measure how
often each source position ends up flipped, and nudge γ_a so the measured
flip rate tracks the rate-distortion target for the profile. The tuned
curve can be compressed into a cubic in the centred position variable.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distortion import solve_zeta, target_flip_probs
from .engine import BipParams, quantize
from .graph import FactorGraph
from .sources import derived_seeds, random_source

__all__ = [
    "TunerConfig",
    "TuningResult",
    "GammaModel",
    "moving_average",
    "estimate_flip_probs",
    "tuner_step",
    "run_tuning",
    "fit_cubic",
    "eval_gamma",
    "centered_positions",
    "parse_gamma_model",
    "serialize_gamma_model",
    "parse_gamma_file",
    "serialize_gamma_file",
    "CENTER_SCALE",
]

# spread of a uniform variable on [0, 1] is 1/sqrt(12) ≈ 0.2886
CENTER_SCALE = 0.2886


@dataclass(frozen=True)
class TunerConfig:
    k: int = 100
    c: float = 3.0
    iterations: int = 10
    window: int = 101
    gamma0: float = 1.07

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("window must be a positive odd integer")


@dataclass
class TuningResult:
    gamma: np.ndarray
    history: list[float] = field(default_factory=list)
    targets: np.ndarray | None = None


def moving_average(x, window: int) -> np.ndarray:
    """Centred moving average; windows are truncated at the ends."""
    x = np.asarray(x, dtype=np.float64)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    h = window // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(x.size)
    lo = np.maximum(idx - h, 0)
    hi = np.minimum(idx + h + 1, x.size)
    return (csum[hi] - csum[lo]) / (hi - lo)


def estimate_flip_probs(
    graph: FactorGraph,
    gamma,
    params: BipParams,
    k: int,
    seed: int,
    window: int = 101,
    threads: int = 1,
) -> np.ndarray:
    """Smoothed per-position rate of ``c_a != s_a`` over ``k`` random sources."""
    if k < 1:
        raise ValueError("k must be >= 1")
    run_params = params.replace(gamma=np.broadcast_to(np.asarray(gamma, float), (graph.n,)))
    seeds = derived_seeds(seed, k)

    def one(trial_seed):
        s = random_source(graph.n, trial_seed)
        return quantize(graph, s, run_params).c != s

    flips = np.zeros(graph.n)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            for f in pool.map(one, seeds):
                flips += f
    else:
        for sd in seeds:
            flips += one(sd)
    return moving_average(flips / k, min(window, graph.n if graph.n % 2 else graph.n - 1))


def tuner_step(gamma, p_hat, p_target, c: float) -> np.ndarray:
    """Shift γ by ``c`` times the mean-centred excess flip rate, clipped at 0."""
    gamma = np.asarray(gamma, dtype=np.float64)
    p_hat = np.asarray(p_hat, dtype=np.float64)
    p_target = np.asarray(p_target, dtype=np.float64)
    if not gamma.shape == p_hat.shape == p_target.shape:
        raise ValueError("gamma, p_hat and p_target must have equal lengths")
    excess = p_hat - p_target
    return np.maximum(gamma + c * (excess - excess.mean()), 0.0)


def run_tuning(
    graph: FactorGraph,
    profile,
    rate: float,
    config: TunerConfig,
    params: BipParams | None = None,
    seed: int = 0,
    threads: int = 1,
    log=None,
) -> TuningResult:
    """Alternate flip-rate estimation and :func:`tuner_step`.

    ``history[j]`` is the mean absolute gap between estimated and target flip
    rates measured at iteration ``j`` (before that iteration's update), so
    ``history`` has ``iterations + 1`` entries when ``iterations > 0`` and is
    empty otherwise.
    """
    if params is None:
        params = BipParams.for_graph(graph, config.gamma0)
    targets = target_flip_probs(profile, solve_zeta(profile, rate))
    gamma = np.full(graph.n, float(config.gamma0))
    history: list[float] = []
    if config.iterations == 0:
        return TuningResult(gamma, history, targets)
    seeds = derived_seeds(seed, config.iterations + 1)
    for it in range(config.iterations + 1):
        p_hat = estimate_flip_probs(graph, gamma, params, config.k, int(seeds[it]),
                                    config.window, threads)
        err = float(np.mean(np.abs(p_hat - targets)))
        history.append(err)
        if log is not None:
            log(it, err, gamma)
        if it == config.iterations:
            break
        gamma = tuner_step(gamma, p_hat, targets, config.c)
    return TuningResult(gamma, history, targets)


@dataclass(frozen=True)
class GammaModel:
    """Cubic ``γ(x) = a3 x^3 + a2 x^2 + a1 x + a0`` in ``x = (a - n/2) / (0.2886 n)``."""

    a3: float
    a2: float
    a1: float
    a0: float
    n: int | None = None

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.a3, self.a2, self.a1, self.a0)


def centered_positions(n: int) -> np.ndarray:
    a = np.arange(n, dtype=np.float64)
    return (a - n / 2) / (CENTER_SCALE * n)


def fit_cubic(gamma, n: int | None = None) -> GammaModel:
    """Least-squares cubic through per-check γ samples."""
    gamma = np.asarray(gamma, dtype=np.float64)
    n = gamma.size if n is None else n
    if gamma.size != n:
        raise ValueError("gamma length must equal n")
    if n < 4:
        raise ValueError("need at least 4 samples to fit a cubic")
    coef = np.polynomial.polynomial.polyfit(centered_positions(n), gamma, 3)
    a0, a1, a2, a3 = (float(x) for x in coef)
    return GammaModel(a3, a2, a1, a0, n)


def eval_gamma(model: GammaModel, n: int) -> np.ndarray:
    x = centered_positions(n)
    g = ((model.a3 * x + model.a2) * x + model.a1) * x + model.a0
    return np.maximum(g, 0.0)


def serialize_gamma_model(model: GammaModel) -> str:
    n = model.n if model.n is not None else 0
    return f"{model.a3!r} {model.a2!r} {model.a1!r} {model.a0!r} {n}\n"


def parse_gamma_model(text: str) -> GammaModel:
    parts = text.split()
    if len(parts) != 5:
        raise ValueError("gamma model must be one line 'a3 a2 a1 a0 n'")
    a3, a2, a1, a0 = (float(x) for x in parts[:4])
    n = int(parts[4])
    return GammaModel(a3, a2, a1, a0, n or None)


def parse_gamma_file(text: str, n: int | None = None) -> np.ndarray:
    g = np.array([float(x) for x in text.split()], dtype=np.float64)
    if n is not None and g.size != n:
        raise ValueError(f"gamma file has {g.size} values, expected {n}")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError("gamma values must be finite and >= 0")
    return g


def serialize_gamma_file(gamma) -> str:
    return "".join(f"{float(g)!r}\n" for g in np.asarray(gamma))
