"""Lyapunov certificates for max-product systems with Markovian jumps.

A certificate is a family of positive vectors ``p(1..M)`` defining
``V(x, y) = p(y)^T o x``. It is accepted at step count ``k0`` when, for
every start mode ``i``,

    delta_i = sum over mode paths i -> j_1 -> ... -> j_{k0-1} -> i'
              of  c_{i j_1} ... c_{j_{k0-1} i'} * max_{r,s} p_r(i') Abar_rs / p_s(i)

is below 1, where ``Abar = A(j_{k0-1}) o ... o A(j_1) o A(i)``. Since
``V`` is monotone and 1-homogeneous, ``delta_i`` is exactly the worst-case
ratio ``E[V(x_k0, y_k0)] / V(x, i)``, attained at ``x = 1 / p(i)``.
"""

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _kernels
from .errors import AlgebraMismatch, CertificateRejected, DimensionMismatch, NotFound, PathExplosion
from .markov import rng_stream
from .semiring import MAX_PRODUCT, otimes_vec

PATH_CAP = 100_000
DEFAULT_MARGIN = 0.05
DEFAULT_RESTARTS = 64
DEFAULT_SWEEPS = 500
MIN_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class Certificate:
    p: np.ndarray  # (M, n), row y-1 is p(y)
    delta: np.ndarray  # (M,), per start mode
    k0: int = 1
    gamma: float = None

    @property
    def delta_max(self):
        return float(self.delta.max())

    @property
    def worst_mode(self):
        return int(self.delta.argmax()) + 1


@dataclass
class SearchOptions:
    margin: float = DEFAULT_MARGIN
    restarts: int = DEFAULT_RESTARTS
    sweeps: int = DEFAULT_SWEEPS
    init_range: float = 3.0
    seed: int = 0
    cap: int = PATH_CAP
    history: list = field(default_factory=list, repr=False)


def _check_inputs(sys, chain):
    if sys.algebra is not MAX_PRODUCT:
        raise AlgebraMismatch("stochastic certificates apply to max-product systems; transform max-plus systems first")
    if chain.M != sys.M:
        raise DimensionMismatch(f"chain has {chain.M} modes, system has {sys.M}")
    if not np.isfinite(sys._A).all():
        raise ValueError("system matrices must be finite")


def _family(sys, p):
    P = np.array(p, dtype=float)
    if P.shape != (sys.M, sys.n):
        raise DimensionMismatch(f"certificate has shape {P.shape}, expected {(sys.M, sys.n)}")
    if not (P > 0).all() or not np.isfinite(P).all():
        raise ValueError("certificate entries must be finite and strictly positive")
    return np.ascontiguousarray(P)


def _check_cap(M, k0, cap):
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    if M**k0 > cap:
        raise PathExplosion(f"{M}^{k0} = {M**k0} mode paths exceeds the cap of {cap}", k0=k0)


def tilde_matrix(a_bar, p_next, p_cur):
    """``diag(p_next) Abar diag(p_cur)^-1`` as an ordinary array."""
    a = a_bar.to_float() if hasattr(a_bar, "to_float") else np.asarray(a_bar, dtype=float)
    p_next = np.asarray(p_next, dtype=float)
    p_cur = np.asarray(p_cur, dtype=float)
    if a.shape != (len(p_next), len(p_cur)):
        raise DimensionMismatch(f"matrix {a.shape} does not match vectors {len(p_next)}, {len(p_cur)}")
    return p_next[:, None] * a / p_cur[None, :]


def _accept(deltas, k0, gamma=None, P=None):
    worst = int(np.argmax(deltas))
    if not deltas[worst] < 1:
        raise CertificateRejected(
            f"mode {worst + 1} has delta {deltas[worst]:.12g} >= 1 (k0={k0})",
            index=worst + 1,
            value=float(deltas[worst]),
            deltas=deltas,
        )
    return Certificate(p=P, delta=deltas, k0=k0, gamma=gamma)


def one_step_deltas(sys, chain, p):
    _check_inputs(sys, chain)
    P = _family(sys, p)
    c = chain.c
    return np.array(
        [
            sum(c[i, j] * tilde_matrix(sys._A[i], P[j], P[i]).max() for j in range(sys.M) if c[i, j] > 0)
            for i in range(sys.M)
        ]
    )


def verify_one_step(sys, chain, p, gamma=None):
    """Accept ``p`` when ``sum_j c_ij * max(tilde A(j, i)) < 1`` for every mode ``i``."""
    deltas = one_step_deltas(sys, chain, p)
    return _accept(deltas, 1, gamma, _family(sys, p))


def kstep_deltas(sys, chain, p, k0, cap=PATH_CAP):
    _check_inputs(sys, chain)
    _check_cap(sys.M, k0, cap)
    P = _family(sys, p)
    return np.asarray(_kernels.kstep_deltas(sys._A, np.ascontiguousarray(chain.c), P, int(k0)))


def verify_k_step(sys, chain, p, k0=1, cap=PATH_CAP, gamma=None):
    deltas = kstep_deltas(sys, chain, p, k0, cap)
    return _accept(deltas, int(k0), gamma, _family(sys, p))


def brute_expectation(sys, chain, p, x, y, k0=1, cap=PATH_CAP):
    """``E[V(x_k0, y_k0) | x_0 = x, y_0 = y]`` by enumerating every mode path."""
    _check_inputs(sys, chain)
    _check_cap(sys.M, k0, cap)
    P = _family(sys, p)
    x = np.asarray(x, dtype=float)
    start = int(y) - 1
    total = 0.0
    for tail in product(range(sys.M), repeat=k0):
        path = (start, *tail)
        prob = math.prod(chain.c[path[t], path[t + 1]] for t in range(k0))
        if prob == 0:
            continue
        state = x
        for t in range(k0):
            state = otimes_vec(sys._A[path[t]], state, MAX_PRODUCT)
        total += prob * float(np.max(P[path[-1]] * state))
    return total


def _descend(objective, q, step, sweeps, target):
    best = objective(q)
    for _ in range(sweeps):
        if best <= target:
            break
        improved = False
        for idx in range(1, len(q)):
            for sign in (1.0, -1.0):
                trial = q.copy()
                trial[idx] += sign * step
                val = objective(trial)
                if val < best:
                    q, best, improved = trial, val, True
                    break
        if not improved:
            step *= 0.5
            if step < MIN_STEP:
                break
    return q, best


def search_certificate(sys, chain, k0_max=1, opts=None):
    """Look for a certificate with ``max_i delta_i <= 1 - margin``.

    For ``k0 = 1, ..., k0_max`` runs coordinate descent on ``q = ln p``
    from seeded random starts, with the first coordinate of ``p(1)`` fixed
    to 1 (certificates are only defined up to a common scale). Returns the
    first certificate reaching the target, re-verified.

    Raises :class:`NotFound` otherwise, which does *not* mean the system
    is unstable.
    """
    opts = opts or SearchOptions()
    _check_inputs(sys, chain)
    target = 1.0 - opts.margin
    A = sys._A
    c = np.ascontiguousarray(chain.c)
    size = sys.M * sys.n
    overall = math.inf
    for k0 in range(1, k0_max + 1):
        _check_cap(sys.M, k0, opts.cap)

        def objective(q, k0=k0):
            return float(_kernels.kstep_deltas(A, c, np.exp(q).reshape(sys.M, sys.n), k0).max())

        for restart in range(opts.restarts):
            rng = rng_stream(opts.seed, k0, restart)
            q0 = rng.uniform(-opts.init_range, opts.init_range, size)
            q0[0] = 0.0
            q, best = _descend(objective, q0, 1.0, opts.sweeps, target)
            opts.history.append((k0, restart, best))
            overall = min(overall, best)
            if best <= target:
                P = np.exp(q).reshape(sys.M, sys.n)
                return verify_k_step(sys, chain, P, k0, opts.cap)
    raise NotFound(
        f"no certificate with max delta <= {target:g} found for k0 <= {k0_max} "
        f"(best {overall:.6g}); this does not show the system is unstable",
        best_objective=overall,
    )
