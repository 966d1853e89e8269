"""Ring directory and the recursive k-ary interval geometry.

Level 1 cuts the whole circle (starting at the node) into ``k`` arcs of
length ``1/k``; every deeper level cuts the slot-1 arc of the level above
into ``k`` again, down to level ``c`` whose arcs are about ``1/n`` long.
A node links into slots 2..k of levels 1..c-1 and into every slot of level c,
so its arcs tile the circle exactly.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Generic, Iterator, TypeVar

from .ring import Arc, RingId, ring_id


class EmptyDirectoryError(LookupError):
    pass


@dataclass(frozen=True)
class Interval:
    level: int
    slot: int
    arc: Arc

    @property
    def key(self) -> tuple[int, int]:
        return (self.level, self.slot)


def level_count(n_est: float, k: int) -> int:
    """Number of division levels: ceil(log_k n_est), computed without floating logs."""
    if k < 2:
        raise ValueError(f"arity k must be >= 2, got {k}")
    if not n_est > 1:
        raise ValueError(f"size estimate must exceed 1, got {n_est}")
    c, span = 1, k
    while span < n_est:
        c += 1
        span *= k
    return c


def interval_bounds(s: RingId, n_est: float, k: int, level: int, slot: int) -> Interval:
    c = level_count(n_est, k)
    if not 1 <= level <= c:
        raise ValueError(f"level {level} outside 1..{c}")
    if not 1 <= slot <= k:
        raise ValueError(f"slot {slot} outside 1..{k}")
    width = k**level
    lo = ring_id(s + (slot - 1) / width)
    # the last level-1 arc ends exactly at s; s + 1 would round
    hi = s if slot == width else ring_id(s + slot / width)
    return Interval(level, slot, Arc(lo, hi))


def linked_slots(n_est: float, k: int) -> list[tuple[int, int]]:
    """(level, slot) pairs a node links, coarsest level first."""
    c = level_count(n_est, k)
    slots = [(level, j) for level in range(1, c) for j in range(2, k + 1)]
    slots.extend((c, j) for j in range(1, k + 1))
    return slots


def linked_intervals(s: RingId, n_est: float, k: int) -> list[Interval]:
    return [interval_bounds(s, n_est, k, level, j) for level, j in linked_slots(n_est, k)]


T = TypeVar("T")


class RingDirectory(Generic[T]):
    """Ordered map of live nodes keyed by ring id.

    This is the simulator's omniscient view of the ring; it answers
    successor/predecessor queries with a binary search rather than a walk.
    """

    def __init__(self) -> None:
        self._ids: list[float] = []
        self._nodes: dict[float, T] = {}

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, x: object) -> bool:
        return x in self._nodes

    def __iter__(self) -> Iterator[T]:
        return (self._nodes[i] for i in self._ids)

    def __getitem__(self, x: RingId) -> T:
        return self._nodes[x]

    def ids(self) -> list[float]:
        return list(self._ids)

    def id_at(self, index: int) -> float:
        return self._ids[index]

    def index_of(self, x: RingId) -> int:
        i = bisect.bisect_left(self._ids, x)
        if i == len(self._ids) or self._ids[i] != x:
            raise KeyError(x)
        return i

    def insert(self, x: RingId, node: T) -> None:
        if x in self._nodes:
            raise ValueError(f"identifier collision at {x!r}")
        bisect.insort(self._ids, x)
        self._nodes[x] = node

    def remove(self, x: RingId) -> T:
        node = self._nodes.pop(x)
        del self._ids[bisect.bisect_left(self._ids, x)]
        return node

    def successor_id(self, x: RingId) -> float:
        if not self._ids:
            raise EmptyDirectoryError("directory is empty")
        i = bisect.bisect_left(self._ids, x)
        return self._ids[i] if i < len(self._ids) else self._ids[0]

    def predecessor_id(self, x: RingId) -> float:
        if not self._ids:
            raise EmptyDirectoryError("directory is empty")
        # index -1 wraps to the largest id
        return self._ids[bisect.bisect_left(self._ids, x) - 1]


def successor_of(directory: RingDirectory, x: RingId):
    """Owner of key ``x``: the first live node at or clockwise after ``x``."""
    return directory[directory.successor_id(x)]


def predecessor_of(directory: RingDirectory, x: RingId):
    """First live node strictly counter-clockwise of ``x``."""
    return directory[directory.predecessor_id(x)]
