"""Seeded Monte-Carlo benchmark of the quantizer.

Trial ``j`` of a run with seed ``S`` quantizes ``random_source(n, S + j)``.
Timing covers the quantization call only (graph sampling and I/O are
excluded).
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from .distortion import as_profile
from .engine import BipParams, QuantizationResult, quantize
from .graph import FactorGraph
from .sources import random_source

__all__ = ["BenchRecord", "CSV_HEADER", "run_trial", "run_trial_full", "run_bench", "mean_record", "write_csv", "format_csv"]

CSV_HEADER = "seed,n,m,rate,profile,distortion,rounds,wall_s,throughput_bps"


@dataclass(frozen=True)
class BenchRecord:
    seed: int | str
    n: int
    m: int
    rate: float
    profile: str
    distortion: float
    rounds: float
    wall_s: float
    throughput_bps: float


def run_trial(graph: FactorGraph, params: BipParams, seed: int, profile=None,
              profile_name: str = "uniform") -> BenchRecord:
    return run_trial_full(graph, params, seed, profile, profile_name)[0]


def run_trial_full(graph: FactorGraph, params: BipParams, seed: int, profile=None,
                   profile_name: str = "uniform") -> tuple[BenchRecord, QuantizationResult]:
    """Like :func:`run_trial` but also returns the quantization result."""
    weights = as_profile(profile, graph.n)
    s = random_source(graph.n, seed)
    t0 = time.perf_counter()
    res = quantize(graph, s, params, weights)
    wall = time.perf_counter() - t0
    rec = BenchRecord(
        seed=seed,
        n=graph.n,
        m=graph.m,
        rate=graph.rate,
        profile=profile_name,
        distortion=res.distortion,
        rounds=len(res.rounds),
        wall_s=wall,
        throughput_bps=graph.n / wall if wall > 0 else float("inf"),
    )
    return rec, res


def run_bench(
    graph: FactorGraph,
    params: BipParams,
    trials: int,
    seed: int,
    profile=None,
    profile_name: str = "uniform",
    threads: int = 1,
) -> list[BenchRecord]:
    """One record per trial, ordered by trial index regardless of ``threads``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    weights = as_profile(profile, graph.n)
    seeds = [seed + j for j in range(trials)]

    def one(sd):
        return run_trial(graph, params, sd, weights, profile_name)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, seeds))
    return [one(sd) for sd in seeds]


def mean_record(records: list[BenchRecord]) -> BenchRecord:
    first = records[0]

    def avg(name):
        return float(np.mean([getattr(r, name) for r in records]))

    return BenchRecord(
        seed="mean",
        n=first.n,
        m=first.m,
        rate=first.rate,
        profile=first.profile,
        distortion=avg("distortion"),
        rounds=avg("rounds"),
        wall_s=avg("wall_s"),
        throughput_bps=avg("throughput_bps"),
    )


def write_csv(records: list[BenchRecord], fh, include_mean: bool = True) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([f.name for f in fields(BenchRecord)])
    rows = list(records)
    if include_mean:
        rows.append(mean_record(records))
    for r in rows:
        writer.writerow([_fmt(v) for v in astuple(r)])


def format_csv(records: list[BenchRecord], include_mean: bool = True) -> str:
    buf = io.StringIO()
    write_csv(records, buf, include_mean)
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)
