# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: segment reductions and periodic neighbor search.

crystalgym.kernels falls back to numpy implementations when this module
is unavailable; both sides must stay numerically identical.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def segment_sum(const cnp.float64_t[:, ::1] values, const cnp.int64_t[::1] seg, Py_ssize_t num_segments):
    """Sum rows of `values` into `num_segments` buckets given by `seg`."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t d = values.shape[1]
    out_arr = np.zeros((num_segments, d), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, s
    for i in range(n):
        s = seg[i]
        for j in range(d):
            out[s, j] += values[i, j]
    return out_arr


def scatter_rows_add(cnp.float64_t[:, ::1] out, const cnp.int64_t[::1] idx, const cnp.float64_t[:, ::1] rows):
    """out[idx[i]] += rows[i], accumulating duplicates in index order."""
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t d = rows.shape[1]
    cdef Py_ssize_t i, j, t
    for i in range(n):
        t = idx[i]
        for j in range(d):
            out[t, j] += rows[i, j]


def neighbor_pairs(const cnp.float64_t[:, ::1] frac, const cnp.float64_t[:, ::1] cell,
                   double cutoff, int shift_range):
    """Ordered pairs (u, v, shift) over periodic images with 0 < d <= cutoff.

    Deterministic ordering: u, then v, then shift lexicographic.
    """
    cdef Py_ssize_t n = frac.shape[0]
    cdef int r = shift_range
    cdef Py_ssize_t cap = n * n * (2 * r + 1) * (2 * r + 1) * (2 * r + 1)
    src_arr = np.empty(cap, dtype=np.int64)
    dst_arr = np.empty(cap, dtype=np.int64)
    shift_arr = np.empty((cap, 3), dtype=np.int64)
    dist_arr = np.empty(cap, dtype=np.float64)
    cdef cnp.int64_t[::1] src = src_arr
    cdef cnp.int64_t[::1] dst = dst_arr
    cdef cnp.int64_t[:, ::1] shift = shift_arr
    cdef cnp.float64_t[::1] dist = dist_arr
    cdef Py_ssize_t u, v, k = 0
    cdef int s1, s2, s3
    cdef double f0, f1, f2, x, y, z, d2, cut2 = cutoff * cutoff, d
    for u in range(n):
        for v in range(n):
            for s1 in range(-r, r + 1):
                for s2 in range(-r, r + 1):
                    for s3 in range(-r, r + 1):
                        f0 = frac[v, 0] + s1 - frac[u, 0]
                        f1 = frac[v, 1] + s2 - frac[u, 1]
                        f2 = frac[v, 2] + s3 - frac[u, 2]
                        x = f0 * cell[0, 0] + f1 * cell[1, 0] + f2 * cell[2, 0]
                        y = f0 * cell[0, 1] + f1 * cell[1, 1] + f2 * cell[2, 1]
                        z = f0 * cell[0, 2] + f1 * cell[1, 2] + f2 * cell[2, 2]
                        d2 = x * x + y * y + z * z
                        if d2 <= cut2:
                            d = sqrt(d2)
                            if d > 0.0:
                                src[k] = u
                                dst[k] = v
                                shift[k, 0] = s1
                                shift[k, 1] = s2
                                shift[k, 2] = s3
                                dist[k] = d
                                k += 1
    return src_arr[:k].copy(), dst_arr[:k].copy(), shift_arr[:k].copy(), dist_arr[:k].copy()
