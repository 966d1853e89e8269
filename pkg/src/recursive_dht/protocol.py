"""Node lifecycle: size estimation, link construction, join, leave, relink."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ring import Arc, RingId, clockwise_distance, in_arc_closed_right, ring_id
from .topology import RingDirectory, interval_bounds, linked_intervals

SlotKey = tuple  # (level, slot)
Meter = Callable[["NodeState", RingId], None]


class ProtocolError(ValueError):
    pass


class InvariantError(AssertionError):
    pass


@dataclass
class NodeState:
    id: RingId
    succ: RingId
    pred: RingId
    n_est: float = 1.0
    n_est_stale: float = 1.0
    links: dict = field(default_factory=dict)
    # (source id, level, slot) of every link pointing here
    incoming: set = field(default_factory=set)

    @property
    def incoming_count(self) -> int:
        return len(self.incoming)

    @property
    def out_degree(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class LinkPolicy:
    """Knobs for link construction.

    ``cap_factor`` scales the incoming-link cap, which is
    ``ceil(cap_factor * (k - 1) * log_k(n_est))``: twice the leading-order
    out-degree by default, so the cap trims outliers without binding on average.
    """

    relink_upper: float = 2.0
    cap_factor: float = 2.0
    enforce_cap: bool = True

    @property
    def relink_lower(self) -> float:
        return 1.0 / self.relink_upper

    def retry_bound(self, n_est: float, arc_length: float) -> int:
        return max(1, math.ceil(math.sqrt(n_est * arc_length) - 1e-9))

    def incoming_cap(self, n_est: float, k: int) -> int:
        if n_est <= 1:
            return 0
        return math.ceil(self.cap_factor * (k - 1) * math.log(n_est) / math.log(k) - 1e-9)


@dataclass
class NetworkState:
    k: int
    rng: np.random.Generator
    policy: LinkPolicy = field(default_factory=LinkPolicy)
    directory: RingDirectory = field(default_factory=RingDirectory)
    # directed (source id, target id) pairs
    failed_links: set = field(default_factory=set)
    tick: int = 0
    count_messages: bool = False
    messages: int = 0

    def __len__(self) -> int:
        return len(self.directory)

    def nodes(self):
        return iter(self.directory)

    def node(self, x: RingId) -> NodeState:
        return self.directory[x]

    def meter(self, u: NodeState, x: RingId) -> None:
        from .routing import resolve_interval_target

        _, hops = resolve_interval_target(u, x, self)
        self.messages += hops


def new_network(k: int, seed=None, policy: Optional[LinkPolicy] = None, rng=None, **kw) -> NetworkState:
    """Empty network; pass either a ``seed`` or an existing generator ``rng``."""
    if k < 2:
        raise ValueError(f"arity k must be >= 2, got {k}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    return NetworkState(k=k, rng=rng, policy=policy or LinkPolicy(), **kw)


def estimate_network_size(node: NodeState, directory: RingDirectory) -> float:
    """Density estimate from the predecessor-to-successor arc (three nodes span it)."""
    n = len(directory)
    if n <= 2:
        est = float(max(n, 1))
    else:
        est = 2.0 / clockwise_distance(node.pred, node.succ)
    node.n_est = est
    return est


def accept_incoming(target: NodeState, k: int, policy: Optional[LinkPolicy] = None) -> bool:
    policy = policy or LinkPolicy()
    if not policy.enforce_cap:
        return True
    return target.incoming_count < policy.incoming_cap(target.n_est, k)


def _link(source: NodeState, key: SlotKey, target: NodeState) -> None:
    source.links[key] = target.id
    target.incoming.add((source.id, key[0], key[1]))


def _unlink(source: NodeState, key: SlotKey, directory: RingDirectory) -> None:
    target_id = source.links.pop(key)
    if target_id in directory:
        directory[target_id].incoming.discard((source.id, key[0], key[1]))


def fill_slot(node: NodeState, key: SlotKey, arc: Arc, n_est: float, k: int,
              directory: RingDirectory, rng, policy: LinkPolicy,
              meter: Optional[Meter] = None) -> bool:
    """Try up to q random draws to link one interval; return whether it succeeded."""
    span = clockwise_distance(arc.lo, arc.hi)
    for _ in range(policy.retry_bound(n_est, span)):
        x = ring_id(arc.lo + rng.random() * span)
        if meter is not None:
            meter(node, x)
        t_id = directory.successor_id(x)
        if t_id == node.id or not in_arc_closed_right(t_id, arc):
            continue
        target = directory[t_id]
        if not accept_incoming(target, k, policy):
            continue
        _link(node, key, target)
        return True
    return False


def build_links(node: NodeState, k: int, directory: RingDirectory, rng,
                policy: Optional[LinkPolicy] = None, meter: Optional[Meter] = None) -> dict:
    """(Re)build every outgoing link of ``node`` from its current estimate.

    Existing links are dropped first. Slots whose interval yields no acceptable
    target within the retry budget stay vacant.
    """
    policy = policy or LinkPolicy()
    drop_links(node, directory)
    node.n_est_stale = node.n_est
    if node.n_est <= 1 or len(directory) < 2:
        return node.links
    for iv in linked_intervals(node.id, node.n_est, k):
        fill_slot(node, iv.key, iv.arc, node.n_est, k, directory, rng, policy, meter)
    return node.links


def drop_links(node: NodeState, directory: RingDirectory) -> None:
    for key in list(node.links):
        _unlink(node, key, directory)


def maybe_relink(node: NodeState, k: int, directory: RingDirectory, rng,
                 policy: Optional[LinkPolicy] = None, meter: Optional[Meter] = None) -> bool:
    policy = policy or LinkPolicy()
    ratio = node.n_est / node.n_est_stale
    if policy.relink_lower < ratio < policy.relink_upper:
        return False
    build_links(node, k, directory, rng, policy, meter)
    return True


def _refresh(network: NetworkState, ids) -> None:
    d = network.directory
    meter = network.meter if network.count_messages else None
    for x in dict.fromkeys(ids):
        if x in d:
            node = d[x]
            estimate_network_size(node, d)
            maybe_relink(node, network.k, d, network.rng, network.policy, meter)


def join(network: NetworkState, new_id: RingId, entry: Optional[RingId] = None) -> NodeState:
    """Insert a node at ``new_id`` and wire it into the overlay.

    ``entry`` is the existing node the newcomer contacts; it only matters for
    message accounting.
    """
    d = network.directory
    new_id = ring_id(new_id)
    if new_id in d:
        raise ProtocolError(f"identifier {new_id!r} already present")
    if len(d) == 0:
        node = NodeState(new_id, new_id, new_id)
        d.insert(new_id, node)
        return node

    if network.count_messages:
        from .routing import greedy_lookup

        start = entry if entry is not None else d.id_at(0)
        network.messages += greedy_lookup(network, start, new_id).hops

    pred = d[d.predecessor_id(new_id)]
    succ = d[d.successor_id(new_id)]
    node = NodeState(new_id, succ.id, pred.id)
    d.insert(new_id, node)
    pred.succ = new_id
    succ.pred = new_id

    for x in (new_id, pred.id, succ.id):
        estimate_network_size(d[x], d)
    meter = network.meter if network.count_messages else None
    build_links(node, network.k, d, network.rng, network.policy, meter)
    for x in dict.fromkeys((pred.id, succ.id)):
        maybe_relink(d[x], network.k, d, network.rng, network.policy, meter)
    return node


def leave(network: NetworkState, node_id: RingId) -> list:
    """Remove a node, repair links that pointed at it, refresh its neighbours.

    Returns the (source id, level, slot) keys whose repair was attempted.
    """
    d = network.directory
    if node_id not in d:
        raise ProtocolError(f"identifier {node_id!r} not present")
    node = d[node_id]
    drop_links(node, d)
    d.remove(node_id)
    network.failed_links = {p for p in network.failed_links if node_id not in p}
    if len(d) == 0:
        return []

    pred, succ = d[node.pred], d[node.succ]
    pred.succ = succ.id
    succ.pred = pred.id

    repaired = sorted(node.incoming)
    meter = network.meter if network.count_messages else None
    for src_id, level, slot in repaired:
        src = d[src_id]
        del src.links[(level, slot)]
        iv = interval_bounds(src.id, src.n_est_stale, network.k, level, slot)
        fill_slot(src, iv.key, iv.arc, src.n_est_stale, network.k, d, network.rng, network.policy, meter)
    node.incoming.clear()

    _refresh(network, (pred.id, succ.id))
    return repaired


def check_invariants(network: NetworkState) -> None:
    """Raise InvariantError if any global structural property is broken.

    Checks ring-cycle integrity, exact size estimates, link/incoming
    bookkeeping, arc membership of every link and the relink band.
    """
    d = network.directory
    n = len(d)
    if n == 0:
        return
    ids = d.ids()
    policy, k = network.policy, network.k
    for i, x in enumerate(ids):
        node = d[x]
        if node.id != x:
            raise InvariantError(f"node stored under {x!r} has id {node.id!r}")
        if node.succ != ids[(i + 1) % n] or node.pred != ids[i - 1]:
            raise InvariantError(f"ring pointers broken at {x!r}")
        expect = float(n) if n <= 2 else 2.0 / clockwise_distance(node.pred, node.succ)
        if node.n_est != expect:
            raise InvariantError(f"stale estimate at {x!r}: {node.n_est} != {expect}")
        ratio = node.n_est / node.n_est_stale
        if not policy.relink_lower < ratio < policy.relink_upper:
            raise InvariantError(f"relink criterion violated at {x!r}: ratio {ratio}")

    total_out = total_in = 0
    for node in d:
        total_out += len(node.links)
        total_in += len(node.incoming)
        for (level, slot), t in node.links.items():
            if t not in d:
                raise InvariantError(f"{node.id!r} links departed node {t!r}")
            if (node.id, level, slot) not in d[t].incoming:
                raise InvariantError(f"incoming record missing for {node.id!r}->{t!r}")
            iv = interval_bounds(node.id, node.n_est_stale, k, level, slot)
            if t == node.id or not in_arc_closed_right(t, iv.arc):
                raise InvariantError(f"link {node.id!r}->{t!r} outside its interval {iv}")
        for src, level, slot in node.incoming:
            if src not in d or d[src].links.get((level, slot)) != node.id:
                raise InvariantError(f"dangling incoming record at {node.id!r}")
    if total_in != total_out:
        raise InvariantError(f"conservation broken: in {total_in} != out {total_out}")
