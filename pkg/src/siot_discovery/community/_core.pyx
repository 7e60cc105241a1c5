# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled local-move sweep for the modularity optimizer.

Mirrors ``_core_py.louvain_pass`` operation for operation; both kernels must
stay arithmetically identical so a seeded run gives the same partition on
either backend.
"""

import numpy as np

KERNEL_NAME = "compiled"


def louvain_pass(long long[::1] indptr,
                 long long[::1] indices,
                 double[::1] weights,
                 double[::1] loops,
                 double[::1] degrees,
                 long long[::1] node_comm,
                 double[::1] comm_tot,
                 double[::1] comm_in,
                 double two_m,
                 long long[::1] order,
                 double min_gain):
    """One sweep of single-node moves over ``order``.

    Mutates node_comm, comm_tot and comm_in in place and returns the number
    of nodes that changed community. The candidate scan visits neighbor
    communities in ascending id so equal-gain ties resolve to the lowest id.
    """
    cdef Py_ssize_t n = node_comm.shape[0]
    touched_arr = np.empty(n, dtype=np.int64)
    wc_arr = np.zeros(n, dtype=np.float64)
    pos_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] touched = touched_arr
    cdef double[::1] wc = wc_arr
    cdef long long[::1] pos = pos_arr

    cdef double inv2m = 1.0 / two_m
    cdef Py_ssize_t oi, e, t, u
    cdef long long i, j, a, c, best_c, key
    cdef Py_ssize_t nt
    cdef double k, w_ia, w_best, s, best_s, s_a, gain, keyw
    cdef int moved = 0

    for oi in range(n):
        i = order[oi]
        a = node_comm[i]
        k = degrees[i]

        # gather weights from i into each neighboring community
        nt = 0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            c = node_comm[j]
            if pos[c] < 0:
                pos[c] = nt
                touched[nt] = c
                wc[nt] = 0.0
                nt += 1
            wc[pos[c]] += weights[e]
        if pos[a] < 0:
            pos[a] = nt
            touched[nt] = a
            wc[nt] = 0.0
            nt += 1
        w_ia = wc[pos[a]]

        # detach i from its community
        comm_tot[a] -= k
        comm_in[a] -= 2.0 * w_ia + 2.0 * loops[i]
        s_a = w_ia - k * comm_tot[a] * inv2m

        # insertion-sort touched ids ascending for deterministic ties
        for t in range(1, nt):
            key = touched[t]
            keyw = wc[t]
            u = t
            while u > 0 and touched[u - 1] > key:
                touched[u] = touched[u - 1]
                wc[u] = wc[u - 1]
                u -= 1
            touched[u] = key
            wc[u] = keyw
        for t in range(nt):
            pos[touched[t]] = t

        best_c = a
        best_s = s_a
        w_best = w_ia
        for t in range(nt):
            c = touched[t]
            if c == a:
                continue
            s = wc[t] - k * comm_tot[c] * inv2m
            if s > best_s:
                best_s = s
                best_c = c
                w_best = wc[t]

        gain = (best_s - s_a) * (2.0 * inv2m)
        if best_c != a and gain >= min_gain:
            comm_tot[best_c] += k
            comm_in[best_c] += 2.0 * w_best + 2.0 * loops[i]
            node_comm[i] = best_c
            moved += 1
        else:
            comm_tot[a] += k
            comm_in[a] += 2.0 * w_ia + 2.0 * loops[i]

        for t in range(nt):
            pos[touched[t]] = -1

    return moved
