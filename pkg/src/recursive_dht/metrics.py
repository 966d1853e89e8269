"""Measured aggregates and closed-form degree/latency curves."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .routing import RoutingSnapshot

ERROR_BUCKETS = 9  # floor(|log2 n_est - log2 n|) = 0..7, last bucket is >= 8


@dataclass
class MetricsRecord:
    tick: int
    n_actual: int
    mean_log_estimate: float
    mean_out_degree: float
    mean_in_degree: float
    mean_hops: float
    hops_stderr: float
    p50_hops: float
    p99_hops: float
    unreachable_fraction: float
    est_within_4: float
    estimation_error_histogram: tuple = field(default_factory=tuple)

    def row(self) -> dict:
        out = asdict(self)
        hist = out.pop("estimation_error_histogram")
        for i, v in enumerate(hist):
            out[f"err_hist_{i}"] = v
        return out

    @staticmethod
    def columns() -> list[str]:
        base = [f for f in MetricsRecord.__dataclass_fields__ if f != "estimation_error_histogram"]
        return base + [f"err_hist_{i}" for i in range(ERROR_BUCKETS)]


def theoretical_degree(n: float, k: int) -> float:
    """Leading-order out-degree (k-1) log_k n."""
    _check(n, k)
    return (k - 1) * math.log(n) / math.log(k)


def theoretical_latency(n: float, k: int) -> float:
    """Upper-bound expected hops 2(k-1)/k log_k n from the greedy recurrence."""
    _check(n, k)
    return 2 * (k - 1) / k * math.log(n) / math.log(k)


def _check(n, k):
    if not n > 1:
        raise ValueError(f"n must exceed 1, got {n}")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")


def phase_chain_expected_time(m: int, k: int, exact: bool = False):
    """Expected steps for the phase chain started in phase m to reach phase 0.

    From phase m the chain jumps to phase i (1 <= i < m) with probability
    (k-1)/k^(m-i); the leftover mass k^-(m-1) goes straight to phase 0.
    Evaluated by dynamic programming in exact rationals.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if k < 2:
        raise ValueError("k must be >= 2")
    expected = [Fraction(0)]
    for mm in range(1, m + 1):
        e = Fraction(1)
        for i in range(1, mm):
            e += Fraction(k - 1, k ** (mm - i)) * expected[i]
        expected.append(e)
    return expected[m] if exact else float(expected[m])


def measure(network, lookup_sample_size: int, rng, tick: int | None = None,
            snapshot: RoutingSnapshot | None = None, backend: str | None = None) -> MetricsRecord:
    """Aggregate degrees, estimation error and lookup latency for one snapshot.

    Lookups pick a uniform live start node and a uniform key. Hop statistics
    cover completed lookups only; failures show up in ``unreachable_fraction``.
    """
    n = len(network)
    tick = network.tick if tick is None else tick
    if n == 0:
        nan = float("nan")
        return MetricsRecord(tick, 0, nan, 0.0, 0.0, nan, nan, nan, nan, 0.0, nan,
                             tuple([0.0] * ERROR_BUCKETS))

    nodes = list(network.nodes())
    out_deg = np.array([len(v.links) for v in nodes], dtype=np.float64)
    in_deg = np.array([len(v.incoming) for v in nodes], dtype=np.float64)
    log_est = np.log2(np.array([v.n_est for v in nodes], dtype=np.float64))
    err = np.abs(log_est - math.log2(n))
    buckets = np.minimum(np.floor(err).astype(np.int64), ERROR_BUCKETS - 1)
    hist = np.bincount(buckets, minlength=ERROR_BUCKETS) / n

    mean_hops = se = p50 = p99 = 0.0
    unreachable = 0.0
    if lookup_sample_size > 0:
        snap = snapshot or RoutingSnapshot(network)
        starts = rng.integers(0, n, size=lookup_sample_size)
        keys = rng.random(lookup_sample_size)
        _, hops, ok = snap.lookup_many(starts, keys, backend=backend)
        done = hops[ok.astype(bool)].astype(np.float64)
        unreachable = 1.0 - len(done) / lookup_sample_size
        if len(done):
            mean_hops = float(done.mean())
            se = float(done.std(ddof=1) / math.sqrt(len(done))) if len(done) > 1 else 0.0
            p50, p99 = (float(v) for v in np.percentile(done, [50, 99]))
        else:
            mean_hops = se = p50 = p99 = float("nan")

    return MetricsRecord(
        tick=tick,
        n_actual=n,
        mean_log_estimate=float(log_est.mean()),
        mean_out_degree=float(out_deg.mean()),
        mean_in_degree=float(in_deg.mean()),
        mean_hops=mean_hops,
        hops_stderr=se,
        p50_hops=p50,
        p99_hops=p99,
        unreachable_fraction=unreachable,
        est_within_4=float(np.mean(err <= 4.0)),
        estimation_error_histogram=tuple(float(h) for h in hist),
    )
