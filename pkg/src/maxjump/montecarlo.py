"""Trajectory simulation and Monte-Carlo estimators.

Path ``p`` of a batch draws its modes from stream ``(seed, p)`` and any
input noise from ``(seed, p, 1)``, so a batch is reproducible regardless
of how it is split or ordered.
"""

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AlgebraMismatch, CertificateRejected, DegenerateData, DimensionMismatch, ZeroState
from .markov import ModeSequence, _check_mode, rng_stream
from .semiring import MAX_PLUS, MAX_PRODUCT
from .stochastic import verify_k_step

INPUT_TIMINGS = ("current", "next")


@dataclass(frozen=True)
class LinearInput:
    """Scalar input ``u_k = k T + delta_k``.

    ``delta`` is either an explicit array indexed by ``k`` or a bound ``d``,
    in which case ``delta_k`` is drawn uniformly from ``[-d, d]``.
    """

    T: float
    delta: object = 0.0

    def values(self, horizon, rng):
        k = np.arange(horizon + 1, dtype=float)
        if np.ndim(self.delta) == 0:
            d = float(self.delta)
            noise = rng.uniform(-d, d, horizon + 1) if d > 0 else np.zeros(horizon + 1)
        else:
            noise = np.asarray(self.delta, dtype=float)
            if noise.shape[0] < horizon + 1:
                raise DimensionMismatch(f"delta has {noise.shape[0]} entries, need {horizon + 1}")
            noise = noise[: horizon + 1]
        return (k * self.T + noise)[:, None]


@dataclass(frozen=True, eq=False)
class Trace:
    modes: ModeSequence
    states: np.ndarray  # (horizon + 1, n)
    inputs: np.ndarray = None  # (horizon + 1, m), u_k by time index
    outputs: np.ndarray = None  # (horizon + 1, q)
    seed: int = 0

    @property
    def horizon(self):
        return len(self.states) - 1


@dataclass(frozen=True, eq=False)
class TraceBatch:
    modes: np.ndarray  # (paths, horizon + 1), 1-based
    states: np.ndarray  # (paths, horizon + 1, n)
    inputs: np.ndarray = None
    outputs: np.ndarray = None
    seed: int = 0

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, p):
        return Trace(
            modes=ModeSequence(self.modes[p], self.seed),
            states=self.states[p],
            inputs=None if self.inputs is None else self.inputs[p],
            outputs=None if self.outputs is None else self.outputs[p],
            seed=self.seed,
        )


@dataclass(frozen=True)
class DecayFit:
    a_hat: float
    L_hat: float
    residual: float
    mean_norms: np.ndarray
    window: int


@dataclass(frozen=True)
class BibipoBound:
    m_z: float
    raw_quantile: float
    sup_norms: np.ndarray


@dataclass(frozen=True)
class LagStats:
    median: float
    q95: float
    q99: float
    max: float
    slope_q99: float


def _check_state(sys, x0):
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n,):
        raise DimensionMismatch(f"initial state has shape {x0.shape}, expected ({sys.n},)")
    if np.isnan(x0).any() or (x0 == np.inf).any():
        raise ValueError("initial state must not contain NaN or +inf")
    if sys.algebra is MAX_PRODUCT and (x0 < 0).any():
        raise ValueError("max-product states must be nonnegative")
    return x0


def _input_array(sys, inputs, horizon, paths, seed):
    if inputs is None:
        return None
    if sys.B is None:
        raise ValueError("inputs given but the system has no B matrices")
    if isinstance(inputs, LinearInput):
        if sys.m != 1:
            raise DimensionMismatch("a linear input drives systems with scalar input only")
        return np.stack([inputs.values(horizon, rng_stream(seed, p, 1)) for p in range(paths)])
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim == 2:
        u = np.broadcast_to(u, (paths, *u.shape))
    if u.shape[1] < horizon + 1 or u.shape[2] != sys.m:
        raise DimensionMismatch(f"inputs have shape {u.shape[1:]}, need ({horizon + 1}, {sys.m})")
    return np.array(u[:, : horizon + 1])


def _product(mats, vecs, algebra):
    # mats (..., r, s), vecs (..., s) -> (..., r); operands hold no +inf
    if algebra is MAX_PLUS:
        return (mats + vecs[..., None, :]).max(axis=-1)
    return (mats * vecs[..., None, :]).max(axis=-1)


def simulate_batch(sys, chain, x0, y0, horizon, paths, seed, inputs=None, timing="current"):
    """Simulate ``paths`` independent trajectories of length ``horizon``.

    ``timing="current"`` drives step ``k`` with ``u_k``; ``"next"`` uses
    ``u_{k+1}``, as in the production-line model.
    """
    if timing not in INPUT_TIMINGS:
        raise ValueError(f"timing must be one of {INPUT_TIMINGS}")
    if chain.M != sys.M:
        raise DimensionMismatch(f"chain has {chain.M} modes, system has {sys.M}")
    x0 = _check_state(sys, x0)
    start = _check_mode(y0, sys.M)
    cum = chain.cumulative()
    modes = np.stack(
        [_kernels.sample_chain(cum, rng_stream(seed, p).random(horizon), start) for p in range(paths)]
    )
    u = _input_array(sys, inputs, horizon, paths, seed)
    drive = None
    if u is not None:
        shift = 1 if timing == "next" else 0
        drive = np.ascontiguousarray(_product(sys._B[modes[:, :horizon]], u[:, shift : horizon + shift], sys.algebra))
    states = _kernels.propagate(
        sys._A,
        np.ascontiguousarray(modes),
        np.ascontiguousarray(np.broadcast_to(x0, (paths, sys.n))),
        drive,
        sys.algebra is MAX_PLUS,
    )
    states = np.asarray(states)
    outputs = None if sys.C is None else _product(sys._C[modes], states, sys.algebra)
    return TraceBatch(modes=modes + 1, states=states, inputs=u, outputs=outputs, seed=seed)


def simulate(sys, chain, x0, y0, horizon, seed, inputs=None, timing="current", stream=0):
    """A single trajectory; identical to path ``stream`` of :func:`simulate_batch`."""
    batch = simulate_batch(sys, chain, x0, y0, horizon, stream + 1, seed, inputs, timing)
    return batch[stream]


def _norms(states, algebra):
    if algebra is MAX_PLUS:
        masked = np.where(states == -np.inf, 0.0, np.abs(states))
        return masked.max(axis=-1)
    return np.abs(states).max(axis=-1)


def fit_mean_norm_decay(sys, chain, x0, y0, paths, horizon, seed=0):
    """Fit ``E||x_k|| ~ L ||x_0|| / a^k`` by least squares on ``ln E||x_k||``.

    The mean is taken before the log. The window stops at the first step
    where the mean norm is exactly zero.
    """
    if sys.algebra is not MAX_PRODUCT:
        raise AlgebraMismatch("decay fitting applies to max-product systems")
    batch = simulate_batch(sys.free(), chain, x0, y0, horizon, paths, seed)
    means = _norms(batch.states, MAX_PRODUCT).mean(axis=0)
    zeros = np.flatnonzero(means == 0)
    window = int(zeros[0]) if zeros.size else len(means)
    if window < 5:
        raise DegenerateData(f"mean norm reaches exactly 0 at k = {window}; need at least 5 points")
    k = np.arange(window, dtype=float)
    logs = np.log(means[:window])
    slope, intercept = np.polyfit(k, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (slope * k + intercept)) ** 2)))
    x0_norm = float(np.abs(np.asarray(x0, dtype=float)).max())
    return DecayFit(
        a_hat=math.exp(-slope),
        L_hat=math.exp(intercept) / x0_norm,
        residual=residual,
        mean_norms=means,
        window=window,
    )


def estimate_lyapunov_exponent(sys, chain, x0, y0, paths, horizon, seed=0):
    """Mean over paths of ``max_i x_horizon^i / horizon`` for the free max-plus system."""
    if sys.algebra is not MAX_PLUS:
        raise AlgebraMismatch("Lyapunov exponents are estimated for max-plus systems")
    x0 = np.asarray(x0, dtype=float)
    if not np.isfinite(x0).all():
        raise ValueError("initial state must be finite")
    batch = simulate_batch(sys.free(), chain, x0, y0, horizon, paths, seed)
    return float((batch.states[:, -1].max(axis=1) / horizon).mean())


def check_as_bound(batch, gamma, burn_in):
    """Fraction of paths with ``x_k < k ln(gamma)`` entrywise for all ``k >= burn_in``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    states = batch.states if isinstance(batch, TraceBatch) else np.asarray(batch)
    k = np.arange(states.shape[1], dtype=float)[burn_in:]
    ok = (states[:, burn_in:, :] < (k * math.log(gamma))[None, :, None]).all(axis=(1, 2))
    return float(ok.mean())


def as_bound_sensitivity(batch, gamma, burn_ins):
    """:func:`check_as_bound` over several burn-in values."""
    return {int(K): check_as_bound(batch, gamma, int(K)) for K in burn_ins}


def estimate_bibipo_bound(
    sys, chain, x0, y0, input_bound, eps, paths, horizon, seed=0, certificate=None, inflation=1.2
):
    """Empirical ``(1 - eps)``-quantile of ``sup_k ||z_k||`` under the constant input ``input_bound * 1``.

    By monotonicity the constant input at the bound dominates every input
    with ``||u_k|| <= input_bound``. The reported ``m_z`` is the quantile
    times ``inflation``.
    """
    if sys.algebra is not MAX_PRODUCT:
        raise AlgebraMismatch("BIBipO bounds are estimated for max-product systems")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if certificate is None:
        warnings.warn("free system not certified; the BIBipO bound may not exist", stacklevel=2)
    else:
        try:
            verify_k_step(sys.free(), chain, certificate.p, certificate.k0)
        except CertificateRejected:
            warnings.warn("supplied certificate does not verify for this system", stacklevel=2)
    inputs = None if sys.B is None else np.full((horizon + 1, sys.m), float(input_bound))
    batch = simulate_batch(sys, chain, x0, y0, horizon, paths, seed, inputs)
    z = batch.states if batch.outputs is None else batch.outputs
    sup = _norms(z, MAX_PRODUCT).max(axis=1)
    raw = float(np.quantile(sup, 1 - eps, method="higher"))
    return BibipoBound(m_z=inflation * raw, raw_quantile=raw, sup_norms=sup)


def throughput_lags(sys, chain, T, horizon, paths, seed=0, x0=None, y0=1, delta=0.0, timing="next", burn_in=None):
    """Lag statistics of ``x_k^i - k T`` under the input ``u_k = k T + delta_k``.

    Pools ``k >= burn_in`` (default ``horizon // 5``) over all paths. The
    slope is a least-squares fit of the per-step 99% quantile against ``k``.
    Returns one :class:`LagStats` per state component.
    """
    if sys.algebra is not MAX_PLUS:
        raise AlgebraMismatch("throughput lags are defined for max-plus systems")
    burn_in = horizon // 5 if burn_in is None else burn_in
    x0 = np.zeros(sys.n) if x0 is None else x0
    batch = simulate_batch(sys, chain, x0, y0, horizon, paths, seed, LinearInput(T, delta), timing)
    k = np.arange(horizon + 1, dtype=float)
    lags = batch.states - (k * T)[None, :, None]
    window = lags[:, burn_in:, :]
    per_step_q99 = np.quantile(window, 0.99, axis=0)
    stats = []
    for i in range(sys.n):
        pooled = window[:, :, i].ravel()
        slope = np.polyfit(k[burn_in:], per_step_q99[:, i], 1)[0]
        stats.append(
            LagStats(
                median=float(np.median(pooled)),
                q95=float(np.quantile(pooled, 0.95)),
                q99=float(np.quantile(pooled, 0.99)),
                max=float(pooled.max()),
                slope_q99=float(slope),
            )
        )
    return stats


def _cross_term(coef, own, other, delta):
    # coef * (own / other)^(-delta) * other, continuous at a single zero coordinate
    if own > 0 and other > 0:
        return coef * (own / other) ** (-delta) * other
    return coef * own ** (-delta) * other ** (1 + delta)


def simulate_nonlinear_2d(a, delta, x0, horizon):
    """Iterate the ratio-dependent 2-D max-product map.

    ``x1+ = max(a11 x1, a12 (x1/x2)^-delta x2)`` and
    ``x2+ = max(a21 (x2/x1)^-delta x1, a22 x2)``; with ``delta = 0`` this is
    the linear max-product system with matrix ``a``.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise DimensionMismatch("the nonlinear example is two-dimensional")
    out = np.empty((horizon + 1, 2))
    x1, x2 = (float(v) for v in x0)
    out[0] = x1, x2
    for k in range(horizon):
        if x1 == 0 and x2 == 0:
            raise ZeroState(f"ratio 0/0 at step {k}")
        y1 = max(a[0, 0] * x1, _cross_term(a[0, 1], x1, x2, delta))
        y2 = max(_cross_term(a[1, 0], x2, x1, delta), a[1, 1] * x2)
        x1, x2 = y1, y2
        out[k + 1] = x1, x2
    return out


def write_trace_csv(trace, path):
    """Columns ``k, mode, x_1..x_n`` then ``u_*`` and ``z_*`` when present."""
    n = trace.states.shape[1]
    header = ["k", "mode"] + [f"x_{i + 1}" for i in range(n)]
    if trace.inputs is not None:
        header += [f"u_{i + 1}" for i in range(trace.inputs.shape[1])]
    if trace.outputs is not None:
        header += [f"z_{i + 1}" for i in range(trace.outputs.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(len(trace.states)):
            row = [k, int(trace.modes.modes[k])] + [repr(float(v)) for v in trace.states[k]]
            if trace.inputs is not None:
                row += [repr(float(v)) for v in trace.inputs[k]]
            if trace.outputs is not None:
                row += [repr(float(v)) for v in trace.outputs[k]]
            w.writerow(row)
