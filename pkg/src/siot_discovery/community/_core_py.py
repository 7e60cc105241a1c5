"""Pure-Python fallback for the local-move sweep.

Keeps the exact arithmetic and visit order of the compiled kernel in
``_core.pyx`` so both backends produce bit-identical partitions. Arrays are
unpacked into plain lists; CPython floats are IEEE doubles, so every
expression evaluates the same as the C version.
"""

from __future__ import annotations

import numpy as np

KERNEL_NAME = "pure-python"


def louvain_pass(indptr, indices, weights, loops, degrees, node_comm,
                 comm_tot, comm_in, two_m, order, min_gain):
    """One sweep of single-node moves over ``order``; returns move count."""
    n = len(node_comm)
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    weights_l = weights.tolist()
    loops_l = loops.tolist()
    degrees_l = degrees.tolist()
    comm_l = node_comm.tolist()
    tot_l = comm_tot.tolist()
    in_l = comm_in.tolist()
    order_l = order.tolist()

    wc = [0.0] * n
    pos = [-1] * n
    touched = [0] * n
    inv2m = 1.0 / two_m
    moved = 0

    for i in order_l:
        a = comm_l[i]
        k = degrees_l[i]

        nt = 0
        for e in range(indptr_l[i], indptr_l[i + 1]):
            c = comm_l[indices_l[e]]
            if pos[c] < 0:
                pos[c] = nt
                touched[nt] = c
                wc[nt] = 0.0
                nt += 1
            wc[pos[c]] += weights_l[e]
        if pos[a] < 0:
            pos[a] = nt
            touched[nt] = a
            wc[nt] = 0.0
            nt += 1
        w_ia = wc[pos[a]]

        tot_l[a] -= k
        in_l[a] -= 2.0 * w_ia + 2.0 * loops_l[i]
        s_a = w_ia - k * tot_l[a] * inv2m

        # sort candidates ascending so equal-gain ties pick the lowest id
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
            s = wc[t] - k * tot_l[c] * inv2m
            if s > best_s:
                best_s = s
                best_c = c
                w_best = wc[t]

        gain = (best_s - s_a) * (2.0 * inv2m)
        if best_c != a and gain >= min_gain:
            tot_l[best_c] += k
            in_l[best_c] += 2.0 * w_best + 2.0 * loops_l[i]
            comm_l[i] = best_c
            moved += 1
        else:
            tot_l[a] += k
            in_l[a] += 2.0 * w_ia + 2.0 * loops_l[i]

        for t in range(nt):
            pos[touched[t]] = -1

    node_comm[:] = np.asarray(comm_l, dtype=np.int64)
    comm_tot[:] = np.asarray(tot_l, dtype=np.float64)
    comm_in[:] = np.asarray(in_l, dtype=np.float64)
    return moved
