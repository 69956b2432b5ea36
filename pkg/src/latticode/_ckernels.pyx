# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled nearest-point kernels; same contract as ``_kernels_py``."""

import numpy as np
from libc.stdint cimport int64_t


BACKEND = "cython"


cdef inline int64_t _abs(int64_t v) nogil:
    return -v if v < 0 else v


cdef void _nearest_row(const int64_t[:] a, const int64_t[:] g, int64_t[:] c,
                       int n, int F, bint dn) nogil:
    cdef int64_t size = (<int64_t>1) << F
    cdef int64_t x, klo, r, lo, e, step, nc, ae, best_ae = -1, best_nc = 0, best_step = 0
    cdef int64_t parity = 0
    cdef int i, best_i = -1
    cdef bint better
    for i in range(n):
        x = a[i] - g[i]
        klo = x >> F
        lo = g[i] + (klo << F)
        r = x - (klo << F)
        if 2 * r > size or (2 * r == size and _abs(lo + size) < _abs(lo)):
            c[i] = lo + size
            parity += klo + 1
        else:
            c[i] = lo
            parity += klo
    if not dn or (parity & 1) == 0:
        return
    for i in range(n):
        e = a[i] - c[i]
        if e > 0:
            step = 1
        elif e < 0:
            step = -1
        elif c[i] < 0:
            step = 1
        else:
            step = -1
        nc = 2 * step * c[i] + size
        ae = _abs(e)
        if best_i < 0 or ae > best_ae:
            better = True
        elif ae < best_ae:
            better = False
        elif nc != best_nc:
            better = nc < best_nc
        else:
            # lexicographic: earliest downward flip, else latest upward flip
            better = best_step > 0
        if better:
            best_i = i
            best_ae = ae
            best_nc = nc
            best_step = step
    c[best_i] += best_step << F


cdef bint _better(const int64_t[:] t, int64_t[:] cand, int64_t[:] best, int n) nogil:
    cdef int64_t dc = 0, db = 0, ic = 0, ib = 0, ec, eb
    cdef int i
    for i in range(n):
        ec = t[i] - cand[i]
        eb = t[i] - best[i]
        dc += ec * ec
        db += eb * eb
        ic += t[i] * ec
        ib += t[i] * eb
    if dc != db:
        return dc < db
    if ic != ib:
        return ic > ib
    for i in range(n):
        if cand[i] != best[i]:
            return cand[i] < best[i]
    return False


def coset_nearest(int64_t[:, ::1] a, int frac, int64_t[:, ::1] reps, int shift, bint dn):
    cdef Py_ssize_t N = a.shape[0], n = a.shape[1], R = reps.shape[0], r, g, i
    cdef int F = frac + shift
    out_arr = np.empty((N, n), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t[::1] cand = np.empty(n, dtype=np.int64)
    with nogil:
        for r in range(N):
            for g in range(R):
                _nearest_row(a[r], reps[g], cand, <int>n, F, dn)
                if g == 0 or _better(a[r], cand, out[r], <int>n):
                    for i in range(n):
                        out[r, i] = cand[i]
    return out_arr
