"""Max-plus and max-product scalars and dense matrices.

Both algebras use ``max`` as addition. Multiplication is ordinary ``+`` in
max-plus (with ``-inf + inf = -inf``) and ordinary ``*`` in max-product
(with ``0 * inf = 0``). IEEE arithmetic yields NaN for both of these, so
every product below branches on them explicitly.

Matrices normally hold float64 entries. Entries given as
:class:`fractions.Fraction` switch the matrix to exact rational storage,
which :func:`mat_mul`, :func:`mat_join` and :func:`mat_power` preserve.
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from ._graph import max_cycle_mean as _karp
from .errors import AlgebraMismatch, DimensionMismatch, Divergent


class Algebra(enum.Enum):
    MAX_PLUS = "max-plus"
    MAX_PRODUCT = "max-product"

    @property
    def zero(self):
        return -math.inf if self is Algebra.MAX_PLUS else 0.0

    @property
    def one(self):
        return 0.0 if self is Algebra.MAX_PLUS else 1.0

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("_", "-"))
        except ValueError:
            raise ValueError(f"unknown algebra {value!r}; expected 'max-plus' or 'max-product'") from None


MAX_PLUS = Algebra.MAX_PLUS
MAX_PRODUCT = Algebra.MAX_PRODUCT


def _check_value(value, algebra):
    if value != value:
        raise ValueError("NaN is not a semiring value")
    if algebra is MAX_PRODUCT and value < 0:
        raise ValueError(f"max-product values must be >= 0, got {value}")


def _mul(a, b, algebra):
    if algebra is MAX_PLUS:
        if a == -math.inf or b == -math.inf:
            return -math.inf
        return a + b
    if a == 0 or b == 0:
        return 0.0 if isinstance(a, float) or isinstance(b, float) else Fraction(0)
    return a * b


@dataclass(frozen=True)
class Scalar:
    value: float
    algebra: Algebra = MAX_PRODUCT

    def __post_init__(self):
        object.__setattr__(self, "algebra", Algebra.parse(self.algebra))
        if not isinstance(self.value, Rational):
            object.__setattr__(self, "value", float(self.value))
        _check_value(self.value, self.algebra)


def _same_algebra(a, b):
    if a.algebra is not b.algebra:
        raise AlgebraMismatch(f"cannot combine {a.algebra.value} with {b.algebra.value}")
    return a.algebra


def scalar_join(a, b):
    algebra = _same_algebra(a, b)
    return Scalar(max(a.value, b.value), algebra)


def scalar_mul(a, b):
    algebra = _same_algebra(a, b)
    return Scalar(_mul(a.value, b.value, algebra), algebra)


def _parse_entry(x):
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("-inf", "-infinity"):
            return -math.inf
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        try:
            return Fraction(s)
        except ValueError:
            raise ValueError(f"unrecognised matrix entry {x!r}") from None
    return x


def _to_array(values):
    if isinstance(values, np.ndarray) and values.dtype != object:
        return np.array(values, dtype=float)
    arr = np.array(values, dtype=object)
    flat = [_parse_entry(x) for x in arr.ravel()]
    exact = any(isinstance(x, Fraction) for x in flat)
    if exact and all(isinstance(x, Rational) for x in flat):
        out = np.empty(len(flat), dtype=object)
        out[:] = [Fraction(x) for x in flat]
        return out.reshape(arr.shape)
    return np.array([float(x) for x in flat], dtype=float).reshape(arr.shape)


class SemiringMatrix:
    """Immutable dense matrix tagged with its algebra."""

    __slots__ = ("_values", "algebra")

    def __init__(self, values, algebra=MAX_PRODUCT):
        algebra = Algebra.parse(algebra)
        arr = _to_array(values)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
        if arr.dtype != object:
            if np.isnan(arr).any():
                raise ValueError("NaN entries are not allowed")
            if algebra is MAX_PRODUCT and (arr < 0).any():
                raise ValueError("max-product entries must be >= 0")
        else:
            for x in arr.ravel():
                _check_value(x, algebra)
        arr.flags.writeable = False
        self._values = arr
        self.algebra = algebra

    @classmethod
    def identity(cls, n, algebra=MAX_PRODUCT):
        algebra = Algebra.parse(algebra)
        arr = np.full((n, n), algebra.zero)
        np.fill_diagonal(arr, algebra.one)
        return cls(arr, algebra)

    @classmethod
    def zeros(cls, rows, cols, algebra=MAX_PRODUCT):
        """Matrix filled with the additive identity."""
        algebra = Algebra.parse(algebra)
        return cls(np.full((rows, cols), algebra.zero), algebra)

    @property
    def values(self):
        return self._values

    @property
    def shape(self):
        return self._values.shape

    @property
    def rows(self):
        return self._values.shape[0]

    @property
    def cols(self):
        return self._values.shape[1]

    @property
    def is_exact(self):
        return self._values.dtype == object

    @property
    def T(self):
        return SemiringMatrix(self._values.T, self.algebra)

    def to_float(self):
        return np.array(self._values, dtype=float)

    def __getitem__(self, idx):
        i, j = idx
        return Scalar(self._values[i, j], self.algebra)

    def __eq__(self, other):
        if not isinstance(other, SemiringMatrix):
            return NotImplemented
        return (
            self.algebra is other.algebra
            and self.shape == other.shape
            and bool(np.all(self._values == other._values))
        )

    __hash__ = None

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __or__(self, other):
        return mat_join(self, other)

    def __repr__(self):
        return f"SemiringMatrix({self._values.tolist()!r}, algebra={self.algebra.value!r})"


def otimes(a, b, algebra):
    """Semiring product of raw 2-D arrays (float or object dtype)."""
    if a.dtype == object or b.dtype == object:
        out = np.empty((a.shape[0], b.shape[1]), dtype=object)
        for i in range(a.shape[0]):
            for j in range(b.shape[1]):
                out[i, j] = max(_mul(a[i, p], b[p, j], algebra) for p in range(a.shape[1]))
        return out
    with np.errstate(invalid="ignore"):
        if algebra is MAX_PLUS:
            prod = a[:, :, None] + b[None, :, :]
        else:
            prod = a[:, :, None] * b[None, :, :]
    prod[np.isnan(prod)] = algebra.zero
    return prod.max(axis=1)


def otimes_vec(a, x, algebra):
    """``A o x`` for a raw 2-D array and a 1-D vector."""
    return otimes(a, np.asarray(x, dtype=a.dtype if a.dtype == object else float)[:, None], algebra)[:, 0]


def mat_mul(a, b):
    algebra = _same_algebra(a, b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return SemiringMatrix(otimes(a.values, b.values, algebra), algebra)


def mat_join(a, b):
    algebra = _same_algebra(a, b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if a.is_exact or b.is_exact:
        joined = np.empty(a.shape, dtype=object)
        for idx in np.ndindex(a.shape):
            joined[idx] = max(a.values[idx], b.values[idx])
    else:
        joined = np.maximum(a.values, b.values)
    return SemiringMatrix(joined, algebra)


def mat_power(a, k):
    if a.rows != a.cols:
        raise DimensionMismatch(f"power of non-square matrix {a.shape}")
    if k < 0:
        raise ValueError("exponent must be nonnegative")
    result = SemiringMatrix.identity(a.rows, a.algebra)
    for _ in range(k):
        result = mat_mul(result, a)
    return result


def cycle_mean(a):
    """Max cycle mean of a square matrix, in the matrix's own algebra.

    Geometric mean of arc weights for max-product (``0`` if acyclic),
    arithmetic mean for max-plus (``-inf`` if acyclic).
    """
    if a.rows != a.cols:
        raise DimensionMismatch(f"cycle mean of non-square matrix {a.shape}")
    w = a.to_float()
    if a.algebra is MAX_PRODUCT:
        with np.errstate(divide="ignore"):
            return math.exp(_karp(np.log(w)))
    return _karp(w)


def kleene_plus(a):
    """``A^+ = I v A v A^2 v ...`` (the join starts at ``A^0``).

    When the max cycle mean is below the multiplicative identity, paths of
    more than ``n - 1`` arcs are dominated, so the join is truncated there.
    """
    if a.rows != a.cols:
        raise DimensionMismatch(f"closure of non-square matrix {a.shape}")
    mean = cycle_mean(a)
    if mean >= a.algebra.one:
        raise Divergent(f"max cycle mean {mean:.6g} >= {a.algebra.one:g}; closure is unbounded")
    result = SemiringMatrix.identity(a.rows, a.algebra)
    power = result
    for _ in range(a.rows - 1):
        power = mat_mul(power, a)
        result = mat_join(result, power)
    return result


def exp_transform(a, gamma):
    """Map a max-plus matrix to max-product: ``exp(A) / gamma`` entrywise."""
    if a.algebra is not MAX_PLUS:
        raise AlgebraMismatch("exp_transform expects a max-plus matrix")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return SemiringMatrix(np.exp(a.to_float()) / gamma, MAX_PRODUCT)


def log_transform(a, gamma):
    """Inverse of :func:`exp_transform`: ``log(A * gamma)`` entrywise."""
    if a.algebra is not MAX_PRODUCT:
        raise AlgebraMismatch("log_transform expects a max-product matrix")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    w = a.to_float()
    if np.isinf(w).any():
        raise ValueError("log_transform requires finite entries")
    with np.errstate(divide="ignore"):
        return SemiringMatrix(np.log(w * gamma), MAX_PLUS)


def inf_norm(x, algebra=MAX_PRODUCT):
    """``max_i |x_i|``. In max-plus, ``-inf`` entries (no event) are skipped."""
    if isinstance(x, SemiringMatrix):
        algebra = x.algebra
        x = x.values
    v = np.asarray(x, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("norm of an empty vector")
    if Algebra.parse(algebra) is MAX_PLUS:
        v = v[v != -np.inf]
        if v.size == 0:
            return 0.0
    return float(np.abs(v).max())


def matrix_from_json(obj, algebra=MAX_PRODUCT):
    """Build a matrix from nested JSON lists; ``"-inf"``/``"inf"`` strings allowed."""
    return SemiringMatrix(obj, algebra)


def matrix_to_json(a):
    def enc(x):
        x = float(x)
        if x == math.inf:
            return "inf"
        if x == -math.inf:
            return "-inf"
        return x

    return [[enc(x) for x in row] for row in a.values]
