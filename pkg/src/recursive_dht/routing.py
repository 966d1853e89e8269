"""Greedy clockwise routing over the overlay."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .ring import RingId, clockwise_distance, ring_id

SUCCESS = "success"
UNREACHABLE = "unreachable"


@dataclass
class LookupResult:
    owner: RingId
    hops: int
    path: list = field(default_factory=list)
    status: str = SUCCESS

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS


def _candidates(node, failed) -> list:
    """Distinct usable next hops of ``node``: its succ pointer plus link targets."""
    seen = dict.fromkeys([node.succ, *node.links.values()])
    seen.pop(node.id, None)
    if failed:
        return [v for v in seen if (node.id, v) not in failed]
    return list(seen)


def greedy_lookup(network, start: RingId, key: RingId,
                  failed_links: Optional[Iterable] = None) -> LookupResult:
    """Route from ``start`` toward ``key``.

    Each hop moves to the usable neighbour closest (clockwise) to the key,
    which must be strictly closer than the current node. The walk ends once
    the key's owner is the current node, or is its successor and reachable
    over a live link.
    """
    d = network.directory
    failed = network.failed_links if failed_links is None else set(failed_links)
    key = ring_id(key)
    owner = d.successor_id(key)
    u = d[start]
    path = [u.id]
    while True:
        if u.id == owner:
            return LookupResult(owner, len(path) - 1, path)
        cands = _candidates(u, failed)
        if u.succ == owner:
            if owner in cands:
                path.append(owner)
                return LookupResult(owner, len(path) - 1, path)
            return LookupResult(owner, len(path) - 1, path, UNREACHABLE)
        best, best_d = None, clockwise_distance(u.id, key)
        for v in cands:
            dv = clockwise_distance(v, key)
            if dv < best_d:
                best, best_d = v, dv
        if best is None:
            return LookupResult(owner, len(path) - 1, path, UNREACHABLE)
        path.append(best)
        u = d[best]


def resolve_interval_target(u, x: RingId, network) -> tuple[RingId, int]:
    """Owner of ``x`` plus the hop count of the greedy lookup from ``u`` that finds it."""
    res = greedy_lookup(network, u.id, x, failed_links=())
    return network.directory.successor_id(ring_id(x)), res.hops


class RoutingSnapshot:
    """Array (CSR) view of a network, consumed by the batched lookup kernel."""

    def __init__(self, network, failed_links: Optional[Iterable] = None):
        d = network.directory
        failed = network.failed_links if failed_links is None else set(failed_links)
        ids = d.ids()
        index = {x: i for i, x in enumerate(ids)}
        n = len(ids)
        succ = np.empty(n, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        targets: list[int] = []
        dead: list[int] = []
        for i, x in enumerate(ids):
            node = d[x]
            succ[i] = index[node.succ]
            for v in _candidates(node, ()):
                targets.append(index[v])
                dead.append((x, v) in failed)
            indptr[i + 1] = len(targets)
        self.ids = np.asarray(ids, dtype=np.float64)
        self.succ = succ
        self.indptr = indptr
        self.indices = np.asarray(targets, dtype=np.int64)
        self.failed = np.asarray(dead, dtype=np.uint8)

    def __len__(self) -> int:
        return len(self.ids)

    def owners(self, keys) -> np.ndarray:
        idx = np.searchsorted(self.ids, np.asarray(keys, dtype=np.float64), side="left")
        idx[idx == len(self.ids)] = 0
        return idx

    def lookup_many(self, starts, keys, backend: Optional[str] = None):
        """Batched greedy lookups.

        ``starts`` are node indices into ``self.ids``. Returns
        ``(owner_index, hops, ok)`` arrays; ``hops`` of failed lookups count
        the forwards made before giving up.
        """
        starts = np.ascontiguousarray(starts, dtype=np.int64)
        keys = np.ascontiguousarray(keys, dtype=np.float64)
        fn = kernels.get_lookup_batch(backend)
        return fn(self.ids, self.succ, self.indptr, self.indices, self.failed, starts, keys)
