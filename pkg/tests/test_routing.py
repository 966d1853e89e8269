import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recursive_dht import kernels
from recursive_dht.metrics import phase_chain_expected_time, theoretical_latency
from recursive_dht.protocol import join, new_network
from recursive_dht.ring import clockwise_distance
from recursive_dht.routing import UNREACHABLE, RoutingSnapshot, greedy_lookup, resolve_interval_target
from recursive_dht.simulator import inject_link_failures, run_static

from conftest import brute_successor


def test_key_at_start_is_zero_hops(small_network):
    net = small_network(40, seed=2)
    s = net.directory.id_at(5)
    res = greedy_lookup(net, s, s)
    assert (res.hops, res.owner, res.path, res.ok) == (0, s, [s], True)


def test_key_owned_by_start_is_zero_hops(small_network):
    net = small_network(40, seed=2)
    v = net.node(net.directory.id_at(5))
    key = v.pred + clockwise_distance(v.pred, v.id) / 2
    assert greedy_lookup(net, v.id, key).hops == 0


def test_key_owned_by_successor_is_one_hop(small_network):
    net = small_network(40, seed=2)
    v = net.node(net.directory.id_at(7))
    key = v.id + clockwise_distance(v.id, v.succ) / 2
    res = greedy_lookup(net, v.id, key)
    assert (res.hops, res.owner) == (1, v.succ)


def test_path_is_monotone_and_correct(small_network):
    net = small_network(500, k=3, seed=9)
    ids = net.directory.ids()
    rng = np.random.default_rng(0)
    for _ in range(300):
        start, key = ids[rng.integers(len(ids))], rng.random()
        res = greedy_lookup(net, start, key)
        assert res.ok
        assert res.owner == brute_successor(ids, key)
        assert res.hops == len(res.path) - 1 < len(ids)
        assert len(set(res.path)) == len(res.path)
        # every forward except the final step onto the owner gets strictly closer
        dist = [clockwise_distance(p, key) for p in res.path if p != res.owner]
        assert all(b < a for a, b in zip(dist, dist[1:]))


def test_single_node_network():
    net = new_network(4, seed=0)
    join(net, 0.4)
    assert greedy_lookup(net, 0.4, 0.9).hops == 0
    assert resolve_interval_target(net.node(0.4), 0.1, net) == (0.4, 0)


def test_resolve_interval_target(small_network):
    net = small_network(60, seed=3)
    u = net.node(net.directory.id_at(10))
    x = u.id + clockwise_distance(u.id, u.succ) * 0.99
    assert resolve_interval_target(u, x, net) == (u.succ, 1)


def test_resolve_matches_greedy_on_random_instances():
    rng = np.random.default_rng(12)
    for trial in range(100):
        n = int(rng.integers(2, 40))
        net, _ = run_static(n, int(rng.integers(2, 6)), int(rng.integers(10**6)), lookups=0)
        u = net.node(net.directory.id_at(int(rng.integers(n))))
        x = float(rng.random())
        owner, hops = resolve_interval_target(u, x, net)
        res = greedy_lookup(net, u.id, x)
        assert (owner, hops) == (res.owner, res.hops)


def test_all_links_failed_is_unreachable(small_network):
    net = small_network(100, seed=5)
    dead = inject_link_failures(net, 1.0, np.random.default_rng(0))
    v = net.node(net.directory.id_at(0))
    far = v.id + 0.5
    res = greedy_lookup(dead, v.id, far)
    assert res.status == UNREACHABLE and res.path == [v.id]
    # the owner itself is always reachable
    assert greedy_lookup(dead, v.id, v.id).ok


def test_failed_links_are_skipped(small_network):
    net = small_network(300, k=4, seed=8)
    ids = net.directory.ids()
    start, key = ids[0], ids[150] - 1e-9
    first = greedy_lookup(net, start, key)
    assert first.hops >= 2
    blocked = greedy_lookup(net, start, key, failed_links={(first.path[0], first.path[1])})
    assert first.path[1] not in blocked.path[1:2]
    if blocked.ok:
        assert blocked.owner == first.owner


def test_explicit_failed_links_override_network(small_network):
    net = small_network(100, seed=5)
    dead = inject_link_failures(net, 1.0, np.random.default_rng(0))
    v = net.directory.id_at(0)
    assert greedy_lookup(dead, v, v + 0.5, failed_links=()).ok


@pytest.mark.parametrize("p", [0.0, 0.3, 0.7])
def test_backends_agree(small_network, p):
    net = small_network(400, k=3, seed=11)
    view = inject_link_failures(net, p, np.random.default_rng(1))
    snap = RoutingSnapshot(view)
    rng = np.random.default_rng(2)
    starts = rng.integers(0, len(snap), 3000)
    keys = rng.random(3000)
    results = [snap.lookup_many(starts, keys, backend=b) for b in sorted(kernels.BACKENDS)]
    for other in results[1:]:
        for a, b in zip(results[0], other):
            np.testing.assert_array_equal(a, b)
    owners, hops, ok = results[0]
    for i in range(0, 3000, 10):
        res = greedy_lookup(view, snap.ids[starts[i]], keys[i])
        assert (res.hops, res.ok) == (hops[i], bool(ok[i]))
        assert res.owner == snap.ids[owners[i]]


def test_compiled_backend_is_built():
    assert "compiled" in kernels.BACKENDS
    assert kernels.DEFAULT_BACKEND == "compiled"
    with pytest.raises(ValueError):
        kernels.get_lookup_batch("fortran")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 48), st.integers(2, 6), st.integers(0, 10**6))
def test_exhaustive_oracle_small(n, k, seed):
    net, _ = run_static(n, k, seed, lookups=0)
    ids = net.directory.ids()
    snap = RoutingSnapshot(net)
    keys = np.array(ids + [(a + clockwise_distance(a, b) / 2) % 1.0 for a, b in zip(ids, ids[1:] + ids[:1])])
    starts = np.repeat(np.arange(n), len(keys))
    owners, hops, ok = snap.lookup_many(starts, np.tile(keys, n))
    assert ok.all()
    expect = np.array([ids.index(brute_successor(ids, x)) for x in keys])
    np.testing.assert_array_equal(owners, np.tile(expect, n))
    assert (hops < n).all() or n == 1


def test_mean_hops_bracket_n4096_k4():
    _, rec = run_static(4096, 4, 21, lookups=10_000)
    assert 3 <= rec.mean_hops <= 12


@pytest.mark.parametrize("k, c", [(2, 12), (3, 7), (4, 6), (8, 4)])
def test_hops_between_phase_chain_and_upper_bound(k, c):
    n = k**c
    _, rec = run_static(n, k, 1, lookups=20_000)
    assert phase_chain_expected_time(c, k) <= rec.mean_hops <= theoretical_latency(n, k)


@pytest.mark.xfail(strict=True, reason="per-hop d/k shrink probability measures 0.61 < 3/4 at k=4")
def test_one_hop_shrinks_by_k_with_probability():
    k, c = 4, 6
    net, _ = run_static(k**c, k, 0, ideal=True, lookups=0)
    ids = net.directory.ids()
    rng = np.random.default_rng(1)
    hits = total = 0
    for _ in range(3000):
        key = rng.random()
        res = greedy_lookup(net, ids[rng.integers(len(ids))], key)
        if len(res.path) < 3:
            continue
        total += 1
        hits += clockwise_distance(res.path[1], key) <= clockwise_distance(res.path[0], key) / k
    assert hits / total >= (k - 1) / k
