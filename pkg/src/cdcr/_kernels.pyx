# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: union-find components and optimal assignment.

Semantics must match cdcr._kernels_py exactly; the parity tests compare
both backends element for element.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef long _find(cnp.int64_t[::1] parent, long x):
    cdef long root = x
    cdef long nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def connected_components(long n_nodes, edges_a, edges_b):
    """Label nodes 0..n-1 by component; the label is the component's smallest node."""
    cdef cnp.int64_t[::1] ea = np.ascontiguousarray(edges_a, dtype=np.int64)
    cdef cnp.int64_t[::1] eb = np.ascontiguousarray(edges_b, dtype=np.int64)
    cdef cnp.int64_t[::1] parent = np.arange(n_nodes, dtype=np.int64)
    cdef cnp.int64_t[::1] rank = np.zeros(n_nodes, dtype=np.int64)
    labels_arr = np.empty(n_nodes, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_arr
    smallest_arr = np.full(n_nodes, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] smallest = smallest_arr

    cdef Py_ssize_t idx
    cdef long ra, rb, tmp, i, root
    for idx in range(ea.shape[0]):
        ra = _find(parent, ea[idx])
        rb = _find(parent, eb[idx])
        if ra == rb:
            continue
        if rank[ra] < rank[rb]:
            tmp = ra
            ra = rb
            rb = tmp
        parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1

    for i in range(n_nodes):
        root = _find(parent, i)
        if smallest[root] < 0:
            smallest[root] = i
        labels[i] = smallest[root]
    return labels_arr


def max_weight_assignment(weights):
    """Exact maximum-weight one-to-one matching of min(k, r) pairs."""
    W = np.asarray(weights, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {W.shape}")
    cdef long k = W.shape[0]
    cdef long r = W.shape[1]
    if k == 0 or r == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), 0.0

    cdef bint transposed = k > r
    cost_arr = np.ascontiguousarray(-W.T if transposed else -W, dtype=np.float64)
    cdef cnp.float64_t[:, ::1] cost = cost_arr
    cdef long n = cost.shape[0]
    cdef long m = cost.shape[1]

    cdef cnp.float64_t[::1] u = np.zeros(n + 1)
    cdef cnp.float64_t[::1] v = np.zeros(m + 1)
    cdef cnp.float64_t[::1] minv = np.empty(m + 1)
    cdef cnp.int64_t[::1] p = np.zeros(m + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] way = np.zeros(m + 1, dtype=np.int64)
    cdef cnp.uint8_t[::1] used = np.zeros(m + 1, dtype=np.uint8)

    cdef double INF = float("inf")
    cdef long i, j, j0, j1, i0
    cdef double delta, cur

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(m + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    rows_list = []
    cols_list = []
    for j in range(1, m + 1):
        if p[j] != 0:
            rows_list.append(p[j] - 1)
            cols_list.append(j - 1)
    rows = np.asarray(rows_list, dtype=np.int64)
    cols = np.asarray(cols_list, dtype=np.int64)
    if transposed:
        rows, cols = cols, rows
    order = np.argsort(rows, kind="stable")
    rows = rows[order]
    cols = cols[order]
    W64 = np.asarray(weights, dtype=np.float64)
    total = float(W64[rows, cols].sum()) if rows.size else 0.0
    return rows, cols, total
