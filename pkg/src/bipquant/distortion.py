"""Distortion measures, binary entropy, and rate-distortion targets."""

from __future__ import annotations

import numpy as np
from scipy.optimize import bisect
from scipy.special import entr, expit

__all__ = [
    "Profile",
    "as_profile",
    "uniform_profile",
    "linear_profile",
    "parse_profile",
    "load_profile",
    "weighted_distortion",
    "binary_entropy",
    "inverse_binary_entropy",
    "shannon_distortion",
    "target_flip_probs",
    "solve_zeta",
    "ZETA_MAX",
]

# solve_zeta refuses rates that need a ζ beyond this
ZETA_MAX = 1e4

Profile = np.ndarray


def _check_profile(w: np.ndarray) -> np.ndarray:
    if w.ndim != 1:
        raise ValueError("profile must be one-dimensional")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("profile weights must be finite and >= 0")
    return w


def uniform_profile(n: int) -> Profile:
    return np.ones(n)


def linear_profile(n: int) -> Profile:
    """Weights ``2 (n - i) / n`` for 1-based position ``i``."""
    i = np.arange(1, n + 1)
    return 2.0 * (n - i) / n


def as_profile(profile, n: int) -> Profile:
    """Resolve ``None``, ``"uniform"``, ``"linear"`` or an array to a weight vector."""
    if profile is None or (isinstance(profile, str) and profile == "uniform"):
        return uniform_profile(n)
    if isinstance(profile, str):
        if profile == "linear":
            return linear_profile(n)
        raise ValueError(f"unknown profile name {profile!r}")
    w = _check_profile(np.asarray(profile, dtype=np.float64))
    if w.size != n:
        raise ValueError(f"profile has length {w.size}, expected {n}")
    return w


def parse_profile(text: str, n: int | None = None) -> Profile:
    vals = [float(x) for x in text.split()]
    w = _check_profile(np.array(vals, dtype=np.float64))
    if n is not None and w.size != n:
        raise ValueError(f"profile has length {w.size}, expected {n}")
    return w


def load_profile(path, n: int | None = None) -> Profile:
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read(), n)


def weighted_distortion(s, c, profile=None) -> float:
    """``(1/n) sum_a profile_a |s_a - c_a|``."""
    s = np.asarray(s)
    c = np.asarray(c)
    if s.shape != c.shape or s.ndim != 1:
        raise ValueError(f"length mismatch: {s.shape} vs {c.shape}")
    w = as_profile(profile, s.size)
    return float(np.dot(w, (s != c).astype(np.float64)) / s.size)


def binary_entropy(p):
    """Entropy in bits; ``H(0) = H(1) = 0``. Accepts scalars or arrays."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("binary_entropy argument must lie in [0, 1]")
    h = (entr(arr) + entr(1.0 - arr)) / np.log(2.0)
    return float(h) if h.ndim == 0 else h


def inverse_binary_entropy(h: float) -> float:
    """The ``p`` in ``[0, 0.5]`` with ``H(p) = h``, by bisection."""
    h = float(h)
    if not 0.0 <= h <= 1.0:
        raise ValueError("entropy must lie in [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return bisect(lambda p: binary_entropy(p) - h, 0.0, 0.5, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def shannon_distortion(rate: float) -> float:
    """Smallest average Hamming distortion achievable at ``rate``: ``H^-1(1 - R)``."""
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must lie in (0, 1]")
    return inverse_binary_entropy(1.0 - rate)


def _scaled(profile) -> np.ndarray:
    # ζ is expressed against weights rescaled into [0, 1] by the largest weight
    w = _check_profile(np.asarray(profile, dtype=np.float64))
    top = w.max() if w.size else 0.0
    return w / top if top > 0 else w


def target_flip_probs(profile, zeta: float) -> np.ndarray:
    """Per-position flip probabilities ``e^{-ζϱ} / (1 + e^{-ζϱ})``.

    ``ϱ`` here is the profile divided by its largest weight, so a profile
    and any positive multiple of it share the same ζ.
    """
    if not zeta > 0:
        raise ValueError("zeta must be > 0")
    return expit(-zeta * _scaled(profile))


def solve_zeta(profile, rate: float) -> float:
    """ζ at which the mean entropy of :func:`target_flip_probs` equals ``1 - rate``."""
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    w = _scaled(profile)
    target = 1.0 - rate

    def excess(z):
        return float(np.mean(binary_entropy(expit(-z * w)))) - target

    # mean entropy falls from 1 (ζ -> 0) to the fraction of zero weights (ζ -> ∞)
    if excess(ZETA_MAX) > 0:
        raise ValueError(f"rate {rate} is not reachable with ζ <= {ZETA_MAX:g} for this profile")
    return bisect(excess, 0.0, ZETA_MAX, xtol=1e-13, rtol=8.9e-16, maxiter=500)
