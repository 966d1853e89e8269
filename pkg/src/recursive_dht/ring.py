"""Identifier space: the unit circle [0, 1) with clockwise arithmetic."""

from __future__ import annotations

import hashlib
from typing import NamedTuple

RingId = float

# largest double strictly below 1.0
_BELOW_ONE = 0.9999999999999999


def ring_id(value: float) -> RingId:
    """Reduce ``value`` modulo 1 into [0, 1)."""
    v = float(value) % 1.0
    # tiny negative inputs round up to exactly 1.0
    return 0.0 if v >= 1.0 else v


class Arc(NamedTuple):
    """Clockwise arc [lo, hi). ``lo == hi`` is the empty arc."""

    lo: RingId
    hi: RingId

    @property
    def length(self) -> float:
        return clockwise_distance(self.lo, self.hi)

    def __contains__(self, x: object) -> bool:
        return in_arc(x, self)  # type: ignore[arg-type]


def clockwise_distance(a: RingId, b: RingId) -> float:
    d = (b - a) % 1.0
    return _BELOW_ONE if d >= 1.0 else d


def arc_length(lo: RingId, hi: RingId) -> float:
    return clockwise_distance(lo, hi)


def in_arc(x: RingId, arc: Arc) -> bool:
    return clockwise_distance(arc.lo, x) < clockwise_distance(arc.lo, arc.hi)


def in_arc_closed_right(x: RingId, arc: Arc) -> bool:
    """Membership in (lo, hi].

    A node owns every key in (pred, self], so this is the test that matches
    "the successor of a point drawn from the arc lies in the arc" when ids sit
    exactly on arc boundaries.
    """
    return 0.0 < clockwise_distance(arc.lo, x) <= clockwise_distance(arc.lo, arc.hi)


def sample_uniform_id(rng) -> RingId:
    """Draw a uniform identifier from a seeded ``numpy.random.Generator``."""
    return ring_id(rng.random())


def hash_to_ring(key: str | bytes) -> RingId:
    """Map an external key onto the ring via a 64-bit BLAKE2b digest."""
    if isinstance(key, str):
        key = key.encode("utf-8")
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")
    return ring_id(h / 2.0**64)
