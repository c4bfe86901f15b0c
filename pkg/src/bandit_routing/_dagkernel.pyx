# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backward dynamic program over a DAG in CSR form."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def backward_dp(const cnp.int64_t[::1] rev_order,
                const cnp.int64_t[::1] out_ptr,
                const cnp.int64_t[::1] out_links,
                const cnp.int64_t[::1] heads,
                const double[::1] weights,
                Py_ssize_t dest):
    cdef Py_ssize_t n = out_ptr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist_arr = np.full(n, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] choice_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] dist = dist_arr
    cdef cnp.int64_t[::1] choice = choice_arr
    cdef Py_ssize_t k, v, e, link
    cdef double best, cand
    cdef cnp.int64_t best_link

    dist[dest] = 0.0
    for k in range(rev_order.shape[0]):
        v = rev_order[k]
        if v == dest:
            continue
        best = np.inf
        best_link = -1
        # out-links are sorted by index, so strict < keeps the smallest index on ties
        for e in range(out_ptr[v], out_ptr[v + 1]):
            link = out_links[e]
            if dist[heads[link]] == np.inf:
                continue
            cand = weights[link] + dist[heads[link]]
            if cand < best:
                best = cand
                best_link = link
        dist[v] = best
        choice[v] = best_link
    return dist_arr, choice_arr
