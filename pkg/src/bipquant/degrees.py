"""Edge-perspective degree distributions and their realization on finite graphs.

A distribution such as ``rho(x) = 0.5 x + 0.5 x^2`` is stored as the terms
``((2, 0.5), (3, 0.5))``: the coefficient of ``x^(d-1)`` is the fraction of
edges attached to nodes of degree ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

__all__ = [
    "DegreeDistributionError",
    "EdgeDegreeDistribution",
    "NodeDegreeAssignment",
    "parse_distribution",
    "serialize_distribution",
    "load_distribution",
    "builtin_pair",
    "BUILTIN_RATES",
    "average_degree",
    "design_rate",
    "node_degree_assignment",
]

BUILTIN_RATES = (0.37, 0.5, 0.65, 0.75)

_SUM_TOL = 1e-9
_PARSE_SUM_TOL = 1e-6


class DegreeDistributionError(ValueError):
    """Raised for malformed distributions or infeasible degree assignments."""


@dataclass(frozen=True)
class EdgeDegreeDistribution:
    """Edge fractions per node degree, sorted by degree."""

    terms: tuple[tuple[int, float], ...]

    def __post_init__(self):
        terms = tuple(sorted((int(d), float(f)) for d, f in self.terms))
        if not terms:
            raise DegreeDistributionError("distribution has no terms")
        degrees = [d for d, _ in terms]
        if len(set(degrees)) != len(degrees):
            raise DegreeDistributionError("duplicate degree in distribution")
        for d, f in terms:
            if d < 1:
                raise DegreeDistributionError(f"degree {d} is not positive")
            if not 0.0 < f <= 1.0:
                raise DegreeDistributionError(f"edge fraction {f} for degree {d} outside (0, 1]")
        total = math.fsum(f for _, f in terms)
        if abs(total - 1.0) > _SUM_TOL:
            raise DegreeDistributionError(f"edge fractions sum to {total!r}, not 1")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, degree: int) -> "EdgeDegreeDistribution":
        return cls(((degree, 1.0),))

    @classmethod
    def from_mapping(cls, mapping: dict[int, float]) -> "EdgeDegreeDistribution":
        return cls(tuple(mapping.items()))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.terms)

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(f for _, f in self.terms)

    @property
    def max_degree(self) -> int:
        return self.terms[-1][0]

    @property
    def min_degree(self) -> int:
        return self.terms[0][0]

    def node_fractions(self) -> np.ndarray:
        """Fraction of *nodes* (not edges) carrying each degree."""
        w = np.array([f / d for d, f in self.terms])
        return w / w.sum()


def parse_distribution(text: str) -> EdgeDegreeDistribution:
    """Parse ``degree fraction`` lines; ``#`` starts a comment."""
    terms: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DegreeDistributionError(f"line {lineno}: expected 'degree fraction', got {raw!r}")
        try:
            degree = int(parts[0])
            frac = float(parts[1])
        except ValueError:
            raise DegreeDistributionError(f"line {lineno}: cannot parse {raw!r}") from None
        if degree < 1:
            raise DegreeDistributionError(f"line {lineno}: degree {degree} is not positive")
        if degree in terms:
            raise DegreeDistributionError(f"line {lineno}: duplicate degree {degree}")
        if not (0.0 < frac <= 1.0):
            raise DegreeDistributionError(f"line {lineno}: fraction {frac} outside (0, 1]")
        terms[degree] = frac
    if not terms:
        raise DegreeDistributionError("no terms found")
    total = math.fsum(terms.values())
    if abs(total - 1.0) > _PARSE_SUM_TOL:
        raise DegreeDistributionError(f"line {lineno}: fractions sum to {total:.9g}, expected 1")
    # rounding noise in the file is absorbed here so the stricter invariant holds
    return EdgeDegreeDistribution(tuple((d, f / total) for d, f in terms.items()))


def serialize_distribution(dist: EdgeDegreeDistribution) -> str:
    return "".join(f"{d} {f!r}\n" for d, f in dist.terms)


def load_distribution(path) -> EdgeDegreeDistribution:
    with open(path, encoding="utf-8") as fh:
        return parse_distribution(fh.read())


def builtin_pair(rate: float) -> tuple[EdgeDegreeDistribution, EdgeDegreeDistribution]:
    """Return the shipped ``(check_dist, info_dist)`` pair for one of :data:`BUILTIN_RATES`."""
    for r in BUILTIN_RATES:
        if abs(r - rate) < 1e-9:
            break
    else:
        raise DegreeDistributionError(f"no built-in distribution pair for rate {rate}; choose from {BUILTIN_RATES}")
    data = resources.files("bipquant") / "data"
    rho = parse_distribution((data / f"rho_{r}.txt").read_text(encoding="utf-8"))
    lam = parse_distribution((data / f"lambda_{r}.txt").read_text(encoding="utf-8"))
    return rho, lam


def average_degree(dist: EdgeDegreeDistribution) -> float:
    """Average node degree, ``1 / sum_d (f_d / d)``."""
    return 1.0 / math.fsum(f / d for d, f in dist.terms)


def design_rate(check_dist: EdgeDegreeDistribution, info_dist: EdgeDegreeDistribution) -> float:
    """Rate ``m/n`` implied by edge-count balance between the two sides."""
    return average_degree(check_dist) / average_degree(info_dist)


@dataclass(frozen=True)
class NodeDegreeAssignment:
    counts: tuple[tuple[int, int], ...]
    total_nodes: int
    total_edge_sockets: int

    def __post_init__(self):
        if sum(c for _, c in self.counts) != self.total_nodes:
            raise DegreeDistributionError("node counts do not sum to total_nodes")
        if sum(d * c for d, c in self.counts) != self.total_edge_sockets:
            raise DegreeDistributionError("socket count mismatch")

    def as_dict(self) -> dict[int, int]:
        return {d: c for d, c in self.counts if c}

    def degree_sequence(self) -> np.ndarray:
        """Node degrees in ascending order, one entry per node."""
        return np.repeat(
            np.array([d for d, _ in self.counts], dtype=np.int64),
            np.array([c for _, c in self.counts], dtype=np.int64),
        )


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    raw = weights * total
    counts = np.floor(raw).astype(np.int64)
    short = total - int(counts.sum())
    if short > 0:
        rem = raw - counts
        # descending remainder, ties toward the earlier (smaller-degree) entry
        order = sorted(range(len(rem)), key=lambda k: (-rem[k], k))
        for k in order[:short]:
            counts[k] += 1
    return counts


def _reconcile(counts: dict[int, int], target: int, min_degree: int) -> dict[int, int]:
    counts = dict(counts)
    sockets = sum(d * c for d, c in counts.items())
    if sockets < target:
        # spread the surplus round-robin over the highest-degree class
        top = max(d for d, c in counts.items() if c > 0)
        h = counts[top]
        q, r = divmod(target - sockets, h)
        counts[top] = 0
        counts[top + q] = counts.get(top + q, 0) + (h - r)
        if r:
            counts[top + q + 1] = counts.get(top + q + 1, 0) + r
    while sockets > target:
        top = max(d for d, c in counts.items() if c > 0)
        if top <= min_degree:
            raise DegreeDistributionError("target socket count infeasible")
        take = min(counts[top], sockets - target)
        counts[top] -= take
        counts[top - 1] = counts.get(top - 1, 0) + take
        sockets -= take
    return {d: c for d, c in counts.items() if c > 0}


def node_degree_assignment(
    dist: EdgeDegreeDistribution, total_nodes: int, target_sockets: int | None = None
) -> NodeDegreeAssignment:
    """Integer node counts per degree for ``total_nodes`` nodes.

    Counts follow the node fractions with largest-remainder rounding. If
    ``target_sockets`` is given, the highest-degree nodes are moved one
    socket at a time until the socket total matches it exactly.
    """
    if total_nodes < 1:
        raise DegreeDistributionError("total_nodes must be >= 1")
    counts = _largest_remainder(dist.node_fractions(), total_nodes)
    table = {d: int(c) for d, c in zip(dist.degrees, counts) if c > 0}
    if target_sockets is not None:
        if target_sockets < total_nodes * dist.min_degree:
            raise DegreeDistributionError(
                f"target of {target_sockets} sockets is below the minimum "
                f"{total_nodes * dist.min_degree} for {total_nodes} nodes"
            )
        table = _reconcile(table, int(target_sockets), dist.min_degree)
    items = tuple(sorted(table.items()))
    return NodeDegreeAssignment(items, total_nodes, sum(d * c for d, c in items))

