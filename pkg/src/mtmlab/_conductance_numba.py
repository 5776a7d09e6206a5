"""Gray-code subset walk for exact conductance; numba hot kernel."""

import numpy as np
from numba import njit


@njit(cache=True)
def conductance_gray(flow, pi):
    # flow[i, j] = pi[i] * P[i, j]. Visits all proper subsets in Gray
    # order; each step flips one state and updates pi(A), the A-row flow
    # total, and the internal A-to-A flow in O(m).
    m = pi.shape[0]
    rowsum = np.zeros(m)
    for i in range(m):
        s = 0.0
        for j in range(m):
            s += flow[i, j]
        rowsum[i] = s
    in_set = np.zeros(m, dtype=np.uint8)
    mass = 0.0  # pi(A)
    out_rows = 0.0  # sum_{i in A} sum_j flow[i, j]
    internal = 0.0  # sum_{i, j in A} flow[i, j]
    best = np.inf
    total = np.int64(1) << m
    prev_gray = np.int64(0)
    for k in range(1, total):
        gray = np.int64(k) ^ (np.int64(k) >> 1)
        flipped = gray ^ prev_gray
        prev_gray = gray
        j = 0
        while (flipped >> j) & 1 == 0:
            j += 1
        if in_set[j] == 0:
            delta = flow[j, j]
            for i in range(m):
                if in_set[i] == 1:
                    delta += flow[i, j] + flow[j, i]
            in_set[j] = 1
            mass += pi[j]
            out_rows += rowsum[j]
            internal += delta
        else:
            in_set[j] = 0
            delta = flow[j, j]
            for i in range(m):
                if in_set[i] == 1:
                    delta += flow[i, j] + flow[j, i]
            mass -= pi[j]
            out_rows -= rowsum[j]
            internal -= delta
        if 0.0 < mass <= 0.5:
            cut = out_rows - internal
            ratio = cut / mass
            if ratio < best:
                best = ratio
    return best
