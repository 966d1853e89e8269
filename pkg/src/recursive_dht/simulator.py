"""Discrete-tick churn engine, static builds and link-failure injection."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .metrics import MetricsRecord, measure
from .protocol import (
    LinkPolicy,
    NetworkState,
    NodeState,
    build_links,
    check_invariants,
    estimate_network_size,
    join,
    leave,
    new_network,
)
from .ring import sample_uniform_id

log = logging.getLogger(__name__)

REGIMES = ("static", "expanding", "shrinking", "stable")


def default_rates(regime: str, rate: float = 4.0) -> tuple[float, float]:
    """(join_rate, leave_rate) with a 4:1 skew for growing or shrinking runs."""
    return {
        "static": (0.0, 0.0),
        "stable": (rate, rate),
        "expanding": (rate, rate / 4),
        "shrinking": (rate / 4, rate),
    }[regime]


@dataclass(frozen=True)
class ChurnConfig:
    regime: str = "stable"
    join_rate: float = 4.0
    leave_rate: float = 4.0
    ticks: int = 100
    n_initial: int = 2048
    k: int = 4
    seed: int = 0
    lookups_per_tick: int = 1000

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        j, l = self.join_rate, self.leave_rate
        if j < 0 or l < 0:
            raise ValueError("rates must be non-negative")
        ok = {
            "static": j == 0 and l == 0,
            "expanding": j > l,
            "shrinking": j < l,
            "stable": j == l,
        }[self.regime]
        if not ok:
            raise ValueError(f"rates join={j} leave={l} inconsistent with regime {self.regime!r}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.n_initial < 0 or self.ticks < 0 or self.lookups_per_tick < 0:
            raise ValueError("n_initial, ticks and lookups_per_tick must be non-negative")


def _fresh_ids(rng, count: int, taken=()) -> list[float]:
    seen = set(taken)
    out = []
    while len(out) < count:
        x = sample_uniform_id(rng)
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def bootstrap(ids: Iterable[float], k: int, rng, policy: Optional[LinkPolicy] = None,
              true_size: bool = False) -> NetworkState:
    """Form a network over ``ids`` in one pass.

    Every node estimates its size from its ring neighbours (or is told the
    true size when ``true_size``) and then builds its links, in id order.
    """
    net = new_network(k, policy=policy, rng=rng)
    d = net.directory
    ids = sorted(ids)
    n = len(ids)
    for i, x in enumerate(ids):
        d.insert(x, NodeState(x, ids[(i + 1) % n], ids[i - 1]))
    for node in d:
        if true_size:
            node.n_est = float(n)
        else:
            estimate_network_size(node, d)
    for node in d:
        build_links(node, k, d, net.rng, net.policy)
    return net


def ideal_ids(n: int) -> list[float]:
    """Evenly spaced ids i/n.

    Interval endpoints coincide with node ids exactly only when n is a power
    of two; otherwise rounding can push a boundary node out of its arc.
    """
    return [i / n for i in range(n)]


def run_static(n: int, k: int, seed: int, ideal: bool = False, lookups: int = 10_000,
               policy: Optional[LinkPolicy] = None) -> tuple[NetworkState, MetricsRecord]:
    """Static network: every node knows the true size ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    ids = ideal_ids(n) if ideal else _fresh_ids(rng, n)
    net = bootstrap(ids, k, rng, policy, true_size=True)
    return net, measure(net, lookups, np.random.default_rng([seed, 1]))


def churn_tick(net: NetworkState, join_rate: float, leave_rate: float,
               check: bool = False) -> tuple[int, int]:
    """Apply one tick of Poisson joins followed by Poisson leaves."""
    rng = net.rng
    d = net.directory
    joins = int(rng.poisson(join_rate)) if join_rate > 0 else 0
    leaves = int(rng.poisson(leave_rate)) if leave_rate > 0 else 0
    for _ in range(joins):
        new_id = sample_uniform_id(rng)
        while new_id in d:
            new_id = sample_uniform_id(rng)
        entry = d.id_at(int(rng.integers(len(d)))) if len(d) else None
        join(net, new_id, entry)
        if check:
            check_invariants(net)
    leaves = min(leaves, len(d))
    for _ in range(leaves):
        leave(net, d.id_at(int(rng.integers(len(d)))))
        if check:
            check_invariants(net)
    net.tick += 1
    return joins, leaves


def run_churn(config: ChurnConfig, check: bool = False,
              on_tick: Optional[Callable[[NetworkState, MetricsRecord], None]] = None,
              policy: Optional[LinkPolicy] = None) -> list[MetricsRecord]:
    """Run a churn experiment and return one record per completed tick.

    The initial ``n_initial`` nodes are bootstrapped at tick 0 (with the true
    size for the static regime). A run that loses every node stops early.
    """
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    net = bootstrap(_fresh_ids(rng, cfg.n_initial), cfg.k, rng, policy,
                    true_size=cfg.regime == "static")
    lookup_rng = np.random.default_rng([cfg.seed, 1])
    series = []
    for _ in range(cfg.ticks):
        churn_tick(net, cfg.join_rate, cfg.leave_rate, check=check)
        if len(net) == 0:
            log.info("network went extinct at tick %d", net.tick)
            break
        rec = measure(net, cfg.lookups_per_tick, lookup_rng)
        series.append(rec)
        if on_tick is not None:
            on_tick(net, rec)
    return series


def build_stable(n: int, k: int, seed: int, warmup_ticks: int = 20, rate: float = 8.0,
                 policy: Optional[LinkPolicy] = None) -> NetworkState:
    """A network of about ``n`` nodes that has run ``warmup_ticks`` of balanced churn."""
    rng = np.random.default_rng(seed)
    net = bootstrap(_fresh_ids(rng, n), k, rng, policy)
    for _ in range(warmup_ticks):
        churn_tick(net, rate, rate)
    return net


def inject_link_failures(network: NetworkState, p: float, rng,
                         include_succ: bool = True) -> NetworkState:
    """Return a view of ``network`` whose links each fail independently with probability p.

    The result shares node state with ``network`` and carries its own
    ``failed_links`` set; nothing is repaired. Failures are keyed by directed
    (source, target) pair, so a succ pointer and a long link to the same node
    fail together.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"failure fraction must be in [0, 1], got {p}")
    failed = set()
    for node in network.nodes():
        targets = set(node.links.values())
        if include_succ:
            targets.add(node.succ)
        else:
            targets.discard(node.succ)
        targets.discard(node.id)
        for t in sorted(targets):
            if rng.random() < p:
                failed.add((node.id, t))
    return dataclasses.replace(network, failed_links=failed)
