"""Pure-Python kernels: union-find components and optimal assignment.

Drop-in fallback for the compiled extension; both implementations must
produce identical output (asserted by the parity tests and compared by
benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import numpy as np


def connected_components(n_nodes: int, edges_a: np.ndarray, edges_b: np.ndarray) -> np.ndarray:
    """Label nodes 0..n-1 by component; the label is the component's smallest node.

    Union-find with path compression and union by rank over the edge
    arrays. Output is independent of edge order.
    """
    parent = np.arange(n_nodes, dtype=np.int64)
    rank = np.zeros(n_nodes, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in zip(edges_a, edges_b):
        ra, rb = find(int(a)), find(int(b))
        if ra == rb:
            continue
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1

    labels = np.empty(n_nodes, dtype=np.int64)
    smallest: dict[int, int] = {}
    for i in range(n_nodes):
        root = find(i)
        if root not in smallest:
            smallest[root] = i  # nodes visited in order, so first hit is smallest
        labels[i] = smallest[root]
    return labels


def max_weight_assignment(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact maximum-weight one-to-one matching of min(k, r) pairs.

    Shortest-augmenting-path algorithm with dual potentials, O(n^2 * m).
    Returns (row_indices, col_indices, total) with rows sorted ascending.
    """
    W = np.asarray(weights, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {W.shape}")
    k, r = W.shape
    if k == 0 or r == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), 0.0

    transposed = k > r
    cost = (-W.T if transposed else -W).copy()
    n, m = cost.shape  # n <= m

    INF = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)  # p[j] = row matched to column j (1-based, 0 = free)
    way = np.zeros(m + 1, dtype=np.int64)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, INF)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
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

    rows = []
    cols = []
    for j in range(1, m + 1):
        if p[j] != 0:
            rows.append(p[j] - 1)
            cols.append(j - 1)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if transposed:
        rows, cols = cols, rows
    order = np.argsort(rows, kind="stable")
    rows, cols = rows[order], cols[order]
    total = float(np.asarray(weights, dtype=np.float64)[rows, cols].sum()) if rows.size else 0.0
    return rows, cols, total
