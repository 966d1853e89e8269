"""Simulator and protocol library for a k-ary recursive ring DHT.

Nodes sit on the unit circle. Each node cuts the circle into k arcs, cuts the
arc next to itself into k again, and so on down to arcs about 1/n long, then
links one random node per arc. With k=2 this is Randomized-Chord.
"""

from .metrics import MetricsRecord, measure, phase_chain_expected_time, theoretical_degree, theoretical_latency
from .protocol import (
    LinkPolicy,
    NetworkState,
    NodeState,
    accept_incoming,
    build_links,
    check_invariants,
    estimate_network_size,
    join,
    leave,
    maybe_relink,
    new_network,
)
from .ring import Arc, RingId, clockwise_distance, hash_to_ring, in_arc, ring_id, sample_uniform_id
from .routing import LookupResult, RoutingSnapshot, greedy_lookup, resolve_interval_target
from .simulator import (
    ChurnConfig,
    bootstrap,
    build_stable,
    churn_tick,
    inject_link_failures,
    run_churn,
    run_static,
)
from .topology import (
    Interval,
    RingDirectory,
    interval_bounds,
    level_count,
    linked_intervals,
    predecessor_of,
    successor_of,
)

__version__ = "0.1.0"
