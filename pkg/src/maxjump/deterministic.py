"""Stability of deterministic max-product systems ``x+ = A o x``.

A positive vector ``p`` with ``A^T o p < p`` makes ``V(x) = p^T o x`` a
strictly decreasing Lyapunov function, and one exists exactly when the
max cycle mean of ``A`` is below 1.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._graph import bellman_ford_potentials
from .errors import AlgebraMismatch, CertificateRejected, DimensionMismatch, Infeasible
from .semiring import MAX_PRODUCT, SemiringMatrix, cycle_mean, kleene_plus, otimes

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class DetCertificate:
    p: np.ndarray
    slack: float  # max_i (A^T o p)_i / p_i
    image: np.ndarray  # A^T o p


def _require_max_product(a):
    if a.algebra is not MAX_PRODUCT:
        raise AlgebraMismatch("expected a max-product matrix")
    if a.rows != a.cols:
        raise DimensionMismatch(f"expected a square matrix, got {a.shape}")


def max_cycle_mean(a):
    """Largest (geometric, for max-product) mean arc weight over cycles.

    Returns ``0`` for an acyclic max-product matrix and ``-inf`` for an
    acyclic max-plus one.
    """
    return cycle_mean(a)


def is_exponentially_stable(a):
    _require_max_product(a)
    return max_cycle_mean(a) < 1.0


def _as_vector(p, exact):
    if exact or any(isinstance(v, Fraction) for v in np.ravel(np.asarray(p, dtype=object))):
        out = np.empty(len(p), dtype=object)
        out[:] = [Fraction(v) for v in p]
        return out
    return np.asarray(p, dtype=float)


def verify_det_certificate(a, p):
    """Check ``A^T o p < p`` entrywise.

    Returns a :class:`DetCertificate` with the multiplicative slack, or
    raises :class:`CertificateRejected` naming the first violated index.
    Exact (Fraction) inputs are checked in exact arithmetic.
    """
    _require_max_product(a)
    p = _as_vector(p, a.is_exact)
    if p.shape != (a.rows,):
        raise DimensionMismatch(f"p has length {len(p)}, matrix is {a.shape}")
    if not all(v > 0 for v in p):
        raise ValueError("certificate entries must be strictly positive")
    values = a.values
    if p.dtype == object and values.dtype != object:
        values = SemiringMatrix([[Fraction(x) for x in row] for row in values.tolist()]).values
    elif values.dtype == object and p.dtype != object:
        values = a.to_float()
    image = otimes(values.T, p[:, None], MAX_PRODUCT)[:, 0]
    ratios = [image[i] / p[i] for i in range(len(p))]
    slack = max(ratios)
    for i, r in enumerate(ratios):
        if not r < 1:
            raise CertificateRejected(
                f"(A^T o p)[{i}] = {image[i]} is not below p[{i}] = {p[i]}", index=i, value=slack
            )
    return DetCertificate(p=p, slack=slack, image=image)


def find_det_certificate(a, margin=DEFAULT_MARGIN):
    """Find ``p > 0`` with ``A^T o p <= (1 - margin) p``.

    In log coordinates ``q = ln p`` each positive entry ``A[j, i]`` gives the
    difference constraint ``q_j - q_i <= ln(1 - margin) - ln A[j, i]``;
    zero entries give none. Bellman-Ford either returns potentials or finds
    a negative cycle, i.e. a cycle of ``A`` with geometric mean above
    ``1 - margin``.
    """
    _require_max_product(a)
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    w = a.to_float()
    if not np.isfinite(w).all():
        raise ValueError("find_det_certificate requires finite entries")
    shift = math.log1p(-margin)
    arcs = [(i, j, shift - math.log(w[j, i])) for j in range(a.rows) for i in range(a.rows) if w[j, i] > 0]
    q = bellman_ford_potentials(arcs, a.rows)
    if q is None:
        mean = max_cycle_mean(a)
        raise Infeasible(f"max cycle mean {mean:.6g} is not below 1 - margin = {1 - margin:g}", cycle_mean=mean)
    p = np.exp(q - q.max())
    try:
        return verify_det_certificate(SemiringMatrix(w), p)
    except CertificateRejected as exc:
        raise Infeasible(f"boundary case, slack {exc.value:.17g}", cycle_mean=max_cycle_mean(a)) from exc


def lyapunov_from_lambda(a, lam):
    """``p = lambda^T o A^+``; then ``V(x) = p^T o x`` is non-increasing.

    Raises :class:`~maxjump.errors.Divergent` for unstable ``A``.
    """
    _require_max_product(a)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (a.rows,) or not (lam > 0).all():
        raise ValueError("lambda must be a positive vector matching the matrix size")
    closure = kleene_plus(a).to_float()
    return otimes(lam[None, :], closure, MAX_PRODUCT)[0]
