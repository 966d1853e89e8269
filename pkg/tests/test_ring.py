import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recursive_dht.ring import Arc, clockwise_distance, hash_to_ring, in_arc, ring_id, sample_uniform_id

unit = st.floats(min_value=0.0, max_value=1.0, exclude_max=True)
# generator output: multiples of 2**-53, where clockwise arithmetic is exact
grid = st.integers(min_value=0, max_value=2**53 - 1).map(lambda i: i / 2.0**53)


@pytest.mark.parametrize("a, b, expected", [(0.25, 0.75, 0.5), (0.75, 0.25, 0.5), (0.4, 0.4, 0.0)])
def test_clockwise_distance(a, b, expected):
    assert clockwise_distance(a, b) == expected


@pytest.mark.parametrize("x, arc, expected", [
    (0.3, Arc(0.2, 0.5), True),
    (0.1, Arc(0.9, 0.2), True),
    (0.5, Arc(0.2, 0.5), False),
    (0.2, Arc(0.2, 0.5), True),
    (0.95, Arc(0.2, 0.5), False),
    (0.3, Arc(0.3, 0.3), False),
])
def test_in_arc(x, arc, expected):
    assert in_arc(x, arc) is expected
    assert (x in arc) is expected


def test_ring_id_reduces():
    assert ring_id(1.25) == 0.25
    assert ring_id(-0.25) == 0.75
    assert ring_id(-1e-20) == 0.0
    assert 0.0 <= ring_id(-1e-300) < 1.0


def test_sample_uniform_id_reproducible():
    a = [sample_uniform_id(np.random.default_rng(7)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    rng = np.random.default_rng(11)
    xs = np.array([sample_uniform_id(rng) for _ in range(100_000)])
    assert ((xs >= 0) & (xs < 1)).all()
    assert abs(xs.mean() - 0.5) < 0.01


def test_hash_to_ring_stable():
    assert hash_to_ring("alpha") == hash_to_ring(b"alpha")
    assert 0.0 <= hash_to_ring("alpha") < 1.0
    assert hash_to_ring("alpha") != hash_to_ring("beta")


@given(unit, unit)
def test_distance_complement(a, b):
    d = clockwise_distance(a, b) + clockwise_distance(b, a)
    if a == b:
        assert d == 0.0
    else:
        assert d == pytest.approx(1.0, abs=1e-12)


@given(grid, grid, grid)
def test_complementary_arcs_partition(x, lo, hi):
    assert in_arc(x, Arc(lo, hi)) != in_arc(x, Arc(hi, lo)) or lo == hi


@given(unit, unit, unit, st.sampled_from([0.125, 0.25, 0.5, 0.75]))
def test_in_arc_rotation_invariant(x, lo, hi, shift):
    # dyadic grid so rotation is exact in binary floating point
    x, lo, hi = (round(v * 1024) / 1024 % 1.0 for v in (x, lo, hi))
    rot = [ring_id(v + shift) for v in (x, lo, hi)]
    assert in_arc(x, Arc(lo, hi)) == in_arc(rot[0], Arc(rot[1], rot[2]))
