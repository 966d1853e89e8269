"""Pure-Python batched greedy lookup; mirrors ``_lookup_kernel.pyx`` exactly."""

from bisect import bisect_left

import numpy as np

_BELOW_ONE = 0.9999999999999999


def lookup_batch(ids, succ, indptr, indices, failed, starts, keys):
    ids_l = ids.tolist()
    succ_l = succ.tolist()
    ptr = indptr.tolist()
    nbr = indices.tolist()
    dead = failed.tolist()
    n = len(ids_l)
    m = len(starts)
    owners = np.empty(m, dtype=np.int64)
    hops = np.empty(m, dtype=np.int64)
    ok = np.empty(m, dtype=np.uint8)

    for q, (u, key) in enumerate(zip(starts.tolist(), keys.tolist())):
        o = bisect_left(ids_l, key)
        if o == n:
            o = 0
        h = 0
        status = 1
        while u != o:
            lo, hi = ptr[u], ptr[u + 1]
            if succ_l[u] == o:
                if any(nbr[e] == o and not dead[e] for e in range(lo, hi)):
                    h += 1
                else:
                    status = 0
                break
            bd = key - ids_l[u]
            if bd < 0.0:
                bd += 1.0
                if bd >= 1.0:
                    bd = _BELOW_ONE
            best = -1
            for e in range(lo, hi):
                if dead[e]:
                    continue
                v = nbr[e]
                dv = key - ids_l[v]
                if dv < 0.0:
                    dv += 1.0
                    if dv >= 1.0:
                        dv = _BELOW_ONE
                if dv < bd:
                    bd = dv
                    best = v
            if best < 0:
                status = 0
                break
            u = best
            h += 1
        owners[q] = o
        hops[q] = h
        ok[q] = status
    return owners, hops, ok
