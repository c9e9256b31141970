"""Graph kernels on max-plus weight matrices (``-inf`` means no arc)."""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


def strong_components(weights):
    """Label the strongly connected components of the arc set ``weights > -inf``."""
    adjacency = csr_matrix(np.isfinite(weights) | (weights == np.inf), dtype=np.int8)
    _, labels = connected_components(adjacency, directed=True, connection="strong")
    return labels


def _karp_component(w):
    # Karp's recurrence from node 0 of a strongly connected digraph.
    n = w.shape[0]
    d = np.full((n + 1, n), -np.inf)
    d[0, 0] = 0.0
    for k in range(1, n + 1):
        with np.errstate(invalid="ignore"):
            cand = d[k - 1][:, None] + w
        cand[np.isnan(cand)] = -np.inf
        d[k] = cand.max(axis=0)
    best = -np.inf
    for v in range(n):
        if d[n, v] == -np.inf:
            continue
        worst = np.inf
        for k in range(n):
            if d[k, v] == -np.inf:
                continue
            worst = min(worst, (d[n, v] - d[k, v]) / (n - k))
        best = max(best, worst)
    return best


def max_cycle_mean(weights):
    """Maximum mean arc weight over all directed cycles, ``-inf`` if acyclic.

    Karp's algorithm is run on each strongly connected component; a
    component that is a single node contributes its self-loop weight.
    """
    w = np.asarray(weights, dtype=float)
    labels = strong_components(w)
    best = -np.inf
    for comp in np.unique(labels):
        idx = np.flatnonzero(labels == comp)
        if idx.size == 1:
            best = max(best, w[idx[0], idx[0]])
            continue
        best = max(best, _karp_component(w[np.ix_(idx, idx)]))
    return float(best)


def bellman_ford_potentials(arcs, n, tol=1e-12):
    """Solve ``x[v] - x[u] <= c`` for every arc ``(u, v, c)``.

    Uses a virtual source joined to every node by a zero arc, so the
    returned potentials are all <= 0. Returns ``None`` when a negative
    cycle makes the system infeasible.
    """
    dist = np.zeros(n)
    for _ in range(n):
        changed = False
        for u, v, c in arcs:
            if dist[u] + c < dist[v]:
                dist[v] = dist[u] + c
                changed = True
        if not changed:
            return dist
    for u, v, c in arcs:
        if dist[u] + c < dist[v] - tol:
            return None
    return dist
