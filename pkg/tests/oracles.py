"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np


def simple_cycles(n):
    """Every simple directed cycle of the complete digraph on ``n`` nodes (with loops)."""
    for length in range(1, n + 1):
        for nodes in itertools.permutations(range(n), length):
            if nodes[0] == min(nodes):
                yield nodes


def cycle_mean_by_enumeration(w, geometric=True):
    """Max cycle mean by listing all simple cycles of the arcs ``w > 0`` (or ``> -inf``)."""
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    best = 0.0 if geometric else -math.inf
    for cyc in simple_cycles(n):
        arcs = [(cyc[t], cyc[(t + 1) % len(cyc)]) for t in range(len(cyc))]
        weights = [w[u, v] for u, v in arcs]
        if geometric:
            if min(weights) <= 0:
                continue
            best = max(best, math.prod(weights) ** (1.0 / len(weights)))
        else:
            if min(weights) == -math.inf:
                continue
            best = max(best, sum(weights) / len(weights))
    return best


def maxprod(a, b):
    """Triple-loop max-product matrix product."""
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            out[i, j] = max(a[i, p] * b[p, j] for p in range(a.shape[1]))
    return out


def maxplus(a, b):
    out = np.full((a.shape[0], b.shape[1]), -math.inf)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            out[i, j] = max(
                (-math.inf if a[i, p] == -math.inf or b[p, j] == -math.inf else a[i, p] + b[p, j])
                for p in range(a.shape[1])
            )
    return out


def kstep_terms(A, c, k0):
    """``(start, terminal, probability, Abar)`` for every mode path of ``k0`` steps."""
    M = len(A)
    for i in range(M):
        for tail in itertools.product(range(M), repeat=k0):
            path = (i, *tail)
            prob = math.prod(c[path[t], path[t + 1]] for t in range(k0))
            if prob == 0:
                continue
            prod = np.asarray(A[i], dtype=float)
            for t in range(1, k0):
                prod = maxprod(np.asarray(A[path[t]], dtype=float), prod)
            yield i, path[-1], prob, prod


def optimal_delta(A, c, k0):
    """Global minimum over positive ``p`` of ``max_i delta_i`` at step count ``k0``.

    In log coordinates every term is a maximum of exponentials of affine
    functions, so the problem is convex; it is solved as an exponential
    cone program.
    """
    import cvxpy as cp

    A = [np.asarray(a, dtype=float) for a in A]
    M, n = len(A), A[0].shape[0]
    q = cp.Variable((M, n))
    t = cp.Variable()
    cons = [q[0, 0] == 0]
    sums = [0 for _ in range(M)]
    for i, term, prob, abar in kstep_terms(A, np.asarray(c, dtype=float), k0):
        e = cp.Variable()
        for r in range(n):
            for s in range(n):
                if abar[r, s] > 0:
                    cons.append(cp.exp(q[term, r] + math.log(abar[r, s]) - q[i, s]) <= e)
        cons.append(e >= 0)
        sums[i] = sums[i] + prob * e
    cons += [s <= t for s in sums]
    cp.Problem(cp.Minimize(t), cons).solve(solver=cp.CLARABEL)
    return float(t.value), np.exp(q.value)
