"""Markov chains and Markovian-jump max-plus / max-product systems.

Modes are 1-based wherever they cross the public surface (arguments,
:class:`ModeSequence`, files, messages) and 0-based internally.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AlgebraMismatch, DimensionMismatch, NotStochastic
from .semiring import MAX_PLUS, MAX_PRODUCT, Algebra, SemiringMatrix, exp_transform, otimes_vec

STOCHASTIC_TOL = 1e-12


def rng_stream(seed, *keys):
    """Counter-based generator keyed by ``(seed, *keys)``.

    Each Monte-Carlo trajectory or search restart gets its own stream, so
    results do not depend on execution order.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True, eq=False)
class MarkovChain:
    c: np.ndarray

    @property
    def M(self):
        return self.c.shape[0]

    def cumulative(self):
        """Row-wise CDF with the last positive column of each row pushed to ``inf``."""
        cum = np.cumsum(self.c, axis=1)
        for y in range(self.M):
            last = np.flatnonzero(self.c[y] > 0)[-1]
            cum[y, last:] = np.inf
        return np.ascontiguousarray(cum)


def validate_chain(c):
    arr = np.array(c, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch(f"transition matrix must be square, got shape {arr.shape}")
    if np.isnan(arr).any() or (arr < 0).any() or (arr > 1).any():
        raise NotStochastic("transition probabilities must lie in [0, 1]")
    sums = arr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > STOCHASTIC_TOL)
    if bad.size:
        y = int(bad[0])
        raise NotStochastic(f"row for mode {y + 1} sums to {sums[y]!r}, not 1")
    arr.flags.writeable = False
    return MarkovChain(arr)


@dataclass(frozen=True)
class ModeSequence:
    modes: np.ndarray  # 1-based
    seed: int

    def __len__(self):
        return len(self.modes)


def _check_mode(y, M):
    if not 1 <= int(y) <= M:
        raise ValueError(f"mode {y} outside 1..{M}")
    return int(y) - 1


def sample_modes(chain, y0, horizon, seed, stream=0):
    """Sample ``y_0 .. y_horizon`` starting at mode ``y0`` (1-based)."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    start = _check_mode(y0, chain.M)
    u = rng_stream(seed, stream).random(horizon)
    modes = _kernels.sample_chain(chain.cumulative(), u, start)
    return ModeSequence(modes + 1, seed)


def _as_family(mats, algebra, name):
    if mats is None:
        return None
    out = tuple(m if isinstance(m, SemiringMatrix) else SemiringMatrix(m, algebra) for m in mats)
    for m in out:
        if m.algebra is not algebra:
            raise AlgebraMismatch(f"{name} matrix is {m.algebra.value}, system is {algebra.value}")
        if (m.to_float() == np.inf).any():
            raise ValueError(f"{name} matrices may not contain +inf")
    return out


def _is_single(m):
    # a lone matrix (depth 2) rather than a per-mode family
    if isinstance(m, SemiringMatrix):
        return True
    depth = 0
    while isinstance(m, (list, tuple, np.ndarray)) and len(m):
        m = m[0]
        depth += 1
    return depth == 2 and not isinstance(m, SemiringMatrix)


class JumpSystem:
    """``x+ = A(y) o x  v  B(y) o u``, ``z = C(y) o x``.

    ``o`` is the algebra's product. ``B`` and ``C`` are optional. A single
    matrix passed for ``B`` or ``C`` is shared by every mode.
    """

    def __init__(self, A, B=None, C=None, algebra=None):
        if _is_single(A):
            A = [A]
        if algebra is None:
            algebra = A[0].algebra if isinstance(A[0], SemiringMatrix) else MAX_PRODUCT
        self.algebra = Algebra.parse(algebra)
        self.A = _as_family(A, self.algebra, "A")
        M = len(self.A)
        if B is not None and _is_single(B):
            B = [B] * M
        if C is not None and _is_single(C):
            C = [C] * M
        self.B = _as_family(B, self.algebra, "B")
        self.C = _as_family(C, self.algebra, "C")
        n = self.A[0].rows
        for y, a in enumerate(self.A, 1):
            if a.shape != (n, n):
                raise DimensionMismatch(f"A({y}) has shape {a.shape}, expected {(n, n)}")
        for name, fam, rows_ok in (("B", self.B, True), ("C", self.C, False)):
            if fam is None:
                continue
            if len(fam) != M:
                raise DimensionMismatch(f"{name} has {len(fam)} modes, A has {M}")
            dims = {m.shape for m in fam}
            if len(dims) != 1:
                raise DimensionMismatch(f"{name} matrices have inconsistent shapes {dims}")
            shape = dims.pop()
            if (shape[0] if rows_ok else shape[1]) != n:
                raise DimensionMismatch(f"{name} shape {shape} incompatible with state dimension {n}")
        self._A = np.ascontiguousarray(np.stack([a.to_float() for a in self.A]))
        self._B = None if self.B is None else np.stack([b.to_float() for b in self.B])
        self._C = None if self.C is None else np.stack([c.to_float() for c in self.C])

    @property
    def n(self):
        return self.A[0].rows

    @property
    def M(self):
        return len(self.A)

    @property
    def m(self):
        return None if self.B is None else self.B[0].cols

    @property
    def q(self):
        return None if self.C is None else self.C[0].rows

    def free(self):
        """The same system with inputs and outputs removed."""
        return JumpSystem(self.A, algebra=self.algebra)

    def __repr__(self):
        return f"JumpSystem(algebra={self.algebra.value!r}, n={self.n}, M={self.M}, B={self.B is not None}, C={self.C is not None})"


def step(sys, x, y, u=None):
    """One transition from mode ``y`` (1-based). Returns ``(x_next, z)``.

    ``z = C(y) o x`` is evaluated at the current state, or ``None`` without C.
    """
    i = _check_mode(y, sys.M)
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise DimensionMismatch(f"state has shape {x.shape}, expected ({sys.n},)")
    if (sys.B is None) != (u is None):
        raise ValueError("an input is required exactly when the system has B")
    x_next = otimes_vec(sys._A[i], x, sys.algebra)
    if u is not None:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.shape != (sys.m,):
            raise DimensionMismatch(f"input has shape {u.shape}, expected ({sys.m},)")
        x_next = np.maximum(x_next, otimes_vec(sys._B[i], u, sys.algebra))
    z = None if sys.C is None else otimes_vec(sys._C[i], x, sys.algebra)
    return x_next, z


def transform_system(sys, gamma):
    """Max-plus system -> max-product system via ``exp(.) / gamma``.

    With ``x'_k = exp(x_k) / gamma^k`` and ``d_k = exp(u_k - k ln gamma)``,
    the transformed system satisfies ``x'_{k+1} = A' x'_k v B' d_k`` and
    ``z'_k = exp(z_k) / gamma^k = C' x'_k`` with ``C' = exp(C)``.
    """
    if sys.algebra is not MAX_PLUS:
        raise AlgebraMismatch("transform_system expects a max-plus system")
    A = [exp_transform(a, gamma) for a in sys.A]
    B = None if sys.B is None else [exp_transform(b, gamma) for b in sys.B]
    C = None if sys.C is None else [exp_transform(c, 1.0) for c in sys.C]
    return JumpSystem(A, B, C, algebra=MAX_PRODUCT)
