"""LDGM factor graphs: construction, GF(2) encoding, and decimation bookkeeping.

Edges are stored once, in check-major order (edge ``e`` joins check
``edge_check[e]`` and bit ``edge_bit[e]``; bits inside a check are
ascending). ``bit_edges[bit_ptr[i]:bit_ptr[i + 1]]`` lists the edges of
information bit ``i``, and ``edge_pos`` is the inverse permutation of
``bit_edges``. All indices are 0-based.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .degrees import EdgeDegreeDistribution, node_degree_assignment

__all__ = [
    "GraphError",
    "FactorGraph",
    "ResidualState",
    "sample_graph",
    "encode",
    "decimate",
    "serialize_graph",
    "parse_graph",
    "load_graph",
    "save_graph",
    "parse_source",
    "serialize_source",
]

_SWAP_ATTEMPTS_PER_EDGE = 1000


class GraphError(ValueError):
    """Raised for malformed graphs, graph files, or failed sampling."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FactorGraph:
    n: int
    m: int
    check_ptr: np.ndarray
    edge_bit: np.ndarray
    edge_check: np.ndarray
    bit_ptr: np.ndarray
    bit_edges: np.ndarray
    edge_pos: np.ndarray

    @classmethod
    def from_adjacency(cls, m: int, adjacency: Sequence[Iterable[int]]) -> "FactorGraph":
        """Build from ``adjacency[a]`` = info bits attached to check ``a``."""
        n = len(adjacency)
        if n < 1 or m < 1:
            raise GraphError("a graph needs at least one check and one information bit")
        rows = []
        for a, nbrs in enumerate(adjacency):
            row = sorted(int(i) for i in nbrs)
            for i in row:
                if not 0 <= i < m:
                    raise GraphError(f"check {a}: bit index {i} out of range [0, {m})")
            if len(set(row)) != len(row):
                raise GraphError(f"check {a}: duplicate edge")
            rows.append(row)
        degrees = np.array([len(r) for r in rows], dtype=np.int64)
        check_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=check_ptr[1:])
        edge_bit = np.array([i for r in rows for i in r], dtype=np.int64)
        edge_check = np.repeat(np.arange(n, dtype=np.int64), degrees)
        return cls._from_edges(n, m, check_ptr, edge_bit, edge_check)

    @classmethod
    def _from_edges(cls, n, m, check_ptr, edge_bit, edge_check) -> "FactorGraph":
        bit_deg = np.bincount(edge_bit, minlength=m)
        if np.any(bit_deg == 0):
            raise GraphError(f"information bit {int(np.argmin(bit_deg))} has no edges")
        bit_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(bit_deg, out=bit_ptr[1:])
        # stable sort keeps each bit's edges ordered by check index
        bit_edges = np.argsort(edge_bit, kind="stable").astype(np.int64)
        edge_pos = np.empty_like(bit_edges)
        edge_pos[bit_edges] = np.arange(bit_edges.size)
        return cls(
            n, m,
            _readonly(check_ptr), _readonly(edge_bit), _readonly(edge_check),
            _readonly(bit_ptr), _readonly(bit_edges), _readonly(edge_pos),
        )

    @property
    def num_edges(self) -> int:
        return int(self.edge_bit.size)

    @property
    def rate(self) -> float:
        return self.m / self.n

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    def bit_degrees(self) -> np.ndarray:
        return np.diff(self.bit_ptr)

    def bits_of(self, a: int) -> np.ndarray:
        """V(a): information bits attached to check ``a``."""
        return self.edge_bit[self.check_ptr[a]:self.check_ptr[a + 1]]

    def checks_of(self, i: int) -> np.ndarray:
        """C(i): checks attached to information bit ``i``."""
        return self.edge_check[self.bit_edges[self.bit_ptr[i]:self.bit_ptr[i + 1]]]

    def adjacency(self) -> list[list[int]]:
        return [self.bits_of(a).tolist() for a in range(self.n)]

    def to_dense(self) -> np.ndarray:
        """Generator matrix G (n x m) as a uint8 array."""
        g = np.zeros((self.n, self.m), dtype=np.uint8)
        g[self.edge_check, self.edge_bit] = 1
        return g

    def __eq__(self, other):
        if not isinstance(other, FactorGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.check_ptr, other.check_ptr)
            and np.array_equal(self.edge_bit, other.edge_bit)
        )

    __hash__ = None


@dataclass
class ResidualState:
    """Which part of the graph is still live after decimation, plus s^(r)."""

    active_check: np.ndarray
    active_bit: np.ndarray
    live_degree: np.ndarray
    residual_source: np.ndarray

    @classmethod
    def initial(cls, graph: FactorGraph, s) -> "ResidualState":
        s = _as_bits(s, graph.n, "source")
        deg = graph.check_degrees().astype(np.int64)
        return cls(deg > 0, np.ones(graph.m, dtype=bool), deg, s.copy())

    @property
    def num_active_bits(self) -> int:
        return int(self.active_bit.sum())


def _as_bits(x, length: int, what: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size != length:
        raise GraphError(f"{what} has length {arr.size}, expected {length}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise GraphError(f"{what} must contain only 0/1")
    return arr.astype(np.uint8)


def encode(graph: FactorGraph, w) -> np.ndarray:
    """Codeword ``c = G w`` over GF(2)."""
    w = _as_bits(w, graph.m, "information word")
    csum = np.zeros(graph.num_edges + 1, dtype=np.int64)
    np.cumsum(w[graph.edge_bit], out=csum[1:])
    return ((csum[graph.check_ptr[1:]] - csum[graph.check_ptr[:-1]]) & 1).astype(np.uint8)


def decimate(state: ResidualState, graph: FactorGraph, fixes) -> ResidualState:
    """Remove fixed bits, XOR their values into neighbouring source bits.

    ``fixes`` is a sequence of ``(bit, value)`` pairs. ``state`` is updated
    in place and returned.
    """
    fixes = list(fixes)
    if not fixes:
        return state
    bits = np.array([f[0] for f in fixes], dtype=np.int64)
    vals = np.array([f[1] for f in fixes], dtype=np.int64)
    if np.unique(bits).size != bits.size:
        raise GraphError("the same bit is fixed twice in one decimation step")
    if not np.all(state.active_bit[bits]):
        bad = int(bits[~state.active_bit[bits]][0])
        raise GraphError(f"bit {bad} is already fixed")
    if np.any((vals < 0) | (vals > 1)):
        raise GraphError("fixed values must be 0 or 1")
    starts, stops = graph.bit_ptr[bits], graph.bit_ptr[bits + 1]
    lengths = stops - starts
    idx = np.repeat(starts - np.cumsum(lengths) + lengths, lengths) + np.arange(lengths.sum())
    checks = graph.edge_check[graph.bit_edges[idx]]
    flips = np.repeat(vals, lengths)
    np.subtract.at(state.live_degree, checks, 1)
    parity = np.bincount(checks, weights=flips, minlength=graph.n).astype(np.int64) & 1
    state.residual_source ^= parity.astype(np.uint8)
    state.active_bit[bits] = False
    state.active_check &= state.live_degree > 0
    return state


def sample_graph(
    n: int,
    m: int,
    check_dist: EdgeDegreeDistribution,
    info_dist: EdgeDegreeDistribution,
    seed: int,
) -> FactorGraph:
    """Configuration-model LDGM graph with no parallel edges.

    Check degrees follow ``check_dist`` on ``n`` nodes; bit degrees follow
    ``info_dist`` on ``m`` nodes, nudged so both sides expose the same
    number of sockets. Parallel edges are removed by random edge swaps.
    """
    if n < 1 or m < 1:
        raise GraphError("n and m must be >= 1")
    natural = node_degree_assignment(check_dist, n).total_edge_sockets
    # each side tolerates socket totals between N*d_min and N*d_max
    bit_lo, bit_hi = m * info_dist.min_degree, m * info_dist.max_degree
    target = min(max(natural, bit_lo), bit_hi)
    if not n * check_dist.min_degree <= target <= n * check_dist.max_degree:
        raise GraphError(
            f"cannot reconcile {n} checks ({natural} sockets) with {m} bits "
            f"(needing {bit_lo}..{bit_hi} sockets)"
        )
    check_asg = node_degree_assignment(check_dist, n, target)
    bit_asg = node_degree_assignment(info_dist, m, target)
    check_deg = check_asg.degree_sequence()
    bit_deg = bit_asg.degree_sequence()
    if check_deg.max() > m or bit_deg.max() > n:
        raise GraphError("a node degree exceeds the number of nodes on the other side")

    rng = np.random.default_rng(seed)
    check_deg = rng.permutation(check_deg)
    bit_deg = rng.permutation(bit_deg)
    e_check = np.repeat(np.arange(n, dtype=np.int64), check_deg)
    e_bit = rng.permutation(np.repeat(np.arange(m, dtype=np.int64), bit_deg))
    _remove_parallel_edges(e_check, e_bit, m, rng)

    order = np.lexsort((e_bit, e_check))
    e_check, e_bit = e_check[order], e_bit[order]
    check_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(e_check, minlength=n), out=check_ptr[1:])
    return FactorGraph._from_edges(n, m, check_ptr, e_bit, e_check)


def _remove_parallel_edges(e_check: np.ndarray, e_bit: np.ndarray, m: int, rng) -> None:
    keys = e_check * m + e_bit
    uniq, counts = np.unique(keys, return_counts=True)
    if np.all(counts == 1):
        return
    mult = Counter(dict(zip(uniq.tolist(), counts.tolist())))
    bad = [e for e in range(keys.size) if mult[int(keys[e])] > 1]
    E = keys.size
    budget = _SWAP_ATTEMPTS_PER_EDGE * max(len(bad), 1)
    for e in bad:
        key_e = int(e_check[e]) * m + int(e_bit[e])
        if mult[key_e] <= 1:
            continue
        while True:
            budget -= 1
            if budget < 0:
                raise GraphError("could not remove parallel edges by swapping; try a different seed")
            f = int(rng.integers(E))
            a, i = int(e_check[e]), int(e_bit[e])
            b, j = int(e_check[f]), int(e_bit[f])
            if a == b or i == j:
                continue
            k1, k2 = a * m + j, b * m + i
            key_f = b * m + j
            if mult[k1] or mult[k2]:
                continue
            mult[key_e] -= 1
            mult[key_f] -= 1
            mult[k1] += 1
            mult[k2] += 1
            e_bit[e], e_bit[f] = j, i
            break


def serialize_graph(graph: FactorGraph) -> str:
    lines = ["ldgm 1", f"{graph.n} {graph.m}"]
    for a in range(graph.n):
        bits = graph.bits_of(a)
        lines.append(" ".join([str(bits.size), *map(str, bits.tolist())]))
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> FactorGraph:
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0] != "ldgm 1":
        raise GraphError("missing 'ldgm 1' header")
    try:
        n, m = (int(x) for x in lines[1].split())
    except (IndexError, ValueError):
        raise GraphError("line 2 must be 'n m'") from None
    if n < 1 or m < 1:
        raise GraphError("n and m must be >= 1")
    body = lines[2:]
    if len(body) != n:
        raise GraphError(f"expected {n} adjacency lines, found {len(body)}")
    adjacency = []
    for a, line in enumerate(body):
        try:
            fields = [int(x) for x in line.split()]
        except ValueError:
            raise GraphError(f"line {a + 3}: non-integer entry") from None
        if not fields or fields[0] != len(fields) - 1:
            raise GraphError(f"line {a + 3}: degree field does not match the number of indices")
        adjacency.append(fields[1:])
    return FactorGraph.from_adjacency(m, adjacency)


def save_graph(graph: FactorGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_graph(graph))


def load_graph(path) -> FactorGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def serialize_source(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).tolist()) + "\n"


def parse_source(text: str, n: int | None = None) -> np.ndarray:
    body = text.strip()
    if body.strip("01"):
        raise GraphError("source file must contain only '0'/'1' characters")
    bits = np.frombuffer(body.encode("ascii"), dtype=np.uint8) - ord("0")
    if n is not None and bits.size != n:
        raise GraphError(f"source has length {bits.size}, expected {n}")
    return bits.astype(np.uint8)
