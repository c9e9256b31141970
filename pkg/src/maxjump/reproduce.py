"""End-to-end reproductions of the built-in examples, as named pass/fail checks."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import fixtures as fx
from .deterministic import find_det_certificate, is_exponentially_stable, lyapunov_from_lambda, verify_det_certificate
from .errors import NotFound
from .markov import transform_system
from .montecarlo import check_as_bound, fit_mean_norm_decay, simulate_batch, simulate_nonlinear_2d, throughput_lags
from .semiring import SemiringMatrix, exp_transform, log_transform
from .stochastic import SearchOptions, search_certificate, verify_k_step, verify_one_step

EXAMPLES = ("example1", "nonlinear", "mjexample", "production", "kstep")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _example1(seed):
    A = fx.example1()
    cert = verify_det_certificate(A, fx.EXAMPLE1_P)
    image_ok = list(cert.image) == [Fraction(5, 3), Fraction(4)]
    found = find_det_certificate(SemiringMatrix(A.to_float()), margin=0.1)
    return [
        Check("image", image_ok, f"p^T o A = {[str(v) for v in cert.image]}"),
        Check("slack", cert.slack == Fraction(5, 6), f"slack = {cert.slack}"),
        Check("stable", is_exponentially_stable(A), "max cycle mean below 1"),
        Check("search", found.slack <= 0.9 + 1e-12, f"found p = {np.round(found.p, 6).tolist()}, slack {found.slack:.6f}"),
    ]


def _nonlinear(seed):
    A = fx.nonlinear_linearized()
    back = log_transform(A, fx.NONLINEAR_GAMMA).values
    params = fx.NONLINEAR_MAXPLUS
    expect = np.array([[params["a11"], params["a12"]], [params["a21"], params["a22"]]])
    p = lyapunov_from_lambda(A, fx.NONLINEAR_P)
    rng = np.random.default_rng(seed)
    box = np.array(fx.NONLINEAR_BOX)
    invariant = monotone = True
    for _ in range(100):
        traj = simulate_nonlinear_2d(fx.NONLINEAR_A, fx.NONLINEAR_DELTA, rng.uniform(1e-3, 1, 2) * box, 200)
        invariant &= bool((traj <= box).all())
        V = np.maximum(fx.NONLINEAR_P[0] * traj[:, 0], fx.NONLINEAR_P[1] * traj[:, 1])
        monotone &= bool((np.diff(V) <= 0).all())
    return [
        Check("max-plus parameters", bool(np.allclose(back, expect, atol=5e-5)), f"ln(5 A') = {np.round(back, 4).tolist()}"),
        Check("lyapunov vector", bool(np.allclose(p, fx.NONLINEAR_P)), f"lambda^T o A^+ = {p.tolist()}"),
        Check("certificate", verify_det_certificate(A, fx.NONLINEAR_P).slack < 1, "A'^T o p < p"),
        Check("invariance", invariant, "box {x1 <= 1, x2 <= 0.8} invariant over 100 x 200 steps"),
        Check("V non-increasing", monotone, "V = [1 1.25] o x along every path"),
    ]


def _mjexample(seed):
    sys, chain = fx.mj_example()
    cert = verify_one_step(sys, chain, fx.MJ_P)
    ok = bool(np.allclose(cert.delta, [0.86625, 0.92], atol=1e-9, rtol=0))
    found = search_certificate(sys, chain, 1, SearchOptions(seed=seed))
    fit = fit_mean_norm_decay(sys, chain, [1.0, 1.0], 1, 500, 60, seed=seed)
    return [
        Check("reference certificate", ok, f"delta = {cert.delta.tolist()}"),
        Check("search", found.delta_max < 1, f"delta = {np.round(found.delta, 6).tolist()}"),
        Check("decay", fit.a_hat > 1, f"a_hat = {fit.a_hat:.4f}, residual {fit.residual:.4f}"),
    ]


def _production(seed):
    sys, chain = fx.production()
    gamma = math.exp(fx.PRODUCTION_T)
    primes = [exp_transform(a, gamma).to_float() for a in sys.A]
    match = all(np.array_equal(np.round(a, 4), np.array(b)) for a, b in zip(primes, fx.PRODUCTION_A_PRIME))
    free = transform_system(sys.free(), gamma)
    ref = verify_one_step(free, chain, fx.PRODUCTION_P, gamma=gamma)
    found = search_certificate(free, chain, 1, SearchOptions(seed=seed))
    batch = simulate_batch(sys.free(), chain, np.zeros(3), 1, 500, 1000, seed)
    frac = check_as_bound(batch, gamma, 50)
    lags = throughput_lags(sys, chain, fx.PRODUCTION_T, 500, 200, seed=seed)
    slopes = [s.slope_q99 for s in lags]
    return [
        Check("A' to 4 decimals", match, "exp(A) / e^2.5"),
        Check("reference certificate", ref.delta_max < 1, f"delta = {np.round(ref.delta, 6).tolist()}"),
        Check("search", found.delta_max < 1, f"delta = {np.round(found.delta, 6).tolist()}"),
        Check("growth bound", frac >= 0.99, f"{frac:.3f} of 1000 paths below k ln(gamma) for k >= 50"),
        Check(
            "bounded lags",
            all(abs(s) <= 0.002 for s in slopes),
            f"99% lag quantiles {[round(s.q99, 3) for s in lags]}, slopes {[f'{s:.2e}' for s in slopes]}",
        ),
    ]


def _kstep(seed):
    sys, chain = fx.kstep_example()
    opts = SearchOptions(seed=seed)
    try:
        search_certificate(sys, chain, 1, opts)
        one_step_failed = False
    except NotFound:
        one_step_failed = True
    cert = search_certificate(sys, chain, 2, SearchOptions(seed=seed))
    verify_k_step(sys, chain, cert.p, 2)
    fit = fit_mean_norm_decay(sys, chain, [1.0, 1.0], 1, 500, 60, seed=seed)
    return [
        Check("one-step search fails", one_step_failed, f"best max delta {min(h[2] for h in opts.history):.4f}"),
        Check("two-step certificate", cert.k0 == 2 and cert.delta_max < 1, f"delta = {np.round(cert.delta, 6).tolist()}"),
        Check("decay", fit.a_hat > 1, f"a_hat = {fit.a_hat:.4f}"),
    ]


_RUNNERS = {
    "example1": _example1,
    "nonlinear": _nonlinear,
    "mjexample": _mjexample,
    "production": _production,
    "kstep": _kstep,
}


def run(example, seed=0):
    if example not in _RUNNERS:
        raise ValueError(f"unknown example {example!r}; choose from {', '.join(EXAMPLES)}")
    return _RUNNERS[example](seed)
