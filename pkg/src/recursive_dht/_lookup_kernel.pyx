# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched greedy lookup; semantics match ``_lookup_py.lookup_batch``."""

import numpy as np

cdef double _BELOW_ONE = 0.9999999999999999


cdef inline double _cw(double a, double b) nogil:
    cdef double d = b - a
    if d < 0.0:
        d += 1.0
        if d >= 1.0:
            d = _BELOW_ONE
    return d


cdef inline Py_ssize_t _bisect_left(const double[::1] ids, double key) nogil:
    cdef Py_ssize_t lo = 0, hi = ids.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if ids[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def lookup_batch(const double[::1] ids, const long long[::1] succ,
                 const long long[::1] indptr, const long long[::1] indices,
                 const unsigned char[::1] failed,
                 const long long[::1] starts, const double[::1] keys):
    cdef Py_ssize_t n = ids.shape[0], m = starts.shape[0]
    owners_a = np.empty(m, dtype=np.int64)
    hops_a = np.empty(m, dtype=np.int64)
    ok_a = np.empty(m, dtype=np.uint8)
    cdef long long[::1] owners = owners_a
    cdef long long[::1] hops = hops_a
    cdef unsigned char[::1] ok = ok_a
    cdef Py_ssize_t q, e, lo, hi
    cdef long long u, o, v, best, h
    cdef double key, bd, dv
    cdef unsigned char status, found

    with nogil:
        for q in range(m):
            key = keys[q]
            o = _bisect_left(ids, key)
            if o == n:
                o = 0
            u = starts[q]
            h = 0
            status = 1
            while u != o:
                lo = indptr[u]
                hi = indptr[u + 1]
                if succ[u] == o:
                    found = 0
                    for e in range(lo, hi):
                        if indices[e] == o and not failed[e]:
                            found = 1
                            break
                    if found:
                        h += 1
                    else:
                        status = 0
                    break
                bd = _cw(ids[u], key)
                best = -1
                for e in range(lo, hi):
                    if failed[e]:
                        continue
                    v = indices[e]
                    dv = _cw(ids[v], key)
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
    return owners_a, hops_a, ok_a
