import csv
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxjump import (
    MAX_PRODUCT,
    AlgebraMismatch,
    DegenerateData,
    JumpSystem,
    LinearInput,
    ZeroState,
    as_bound_sensitivity,
    check_as_bound,
    estimate_bibipo_bound,
    estimate_lyapunov_exponent,
    fit_mean_norm_decay,
    simulate,
    simulate_batch,
    simulate_nonlinear_2d,
    throughput_lags,
    validate_chain,
    verify_one_step,
)
from maxjump import fixtures as fx
from maxjump.markov import step
from maxjump.montecarlo import _norms, write_trace_csv


def test_batch_matches_stepwise_simulation():
    sys, chain = fx.production()
    batch = simulate_batch(sys, chain, np.zeros(3), 2, 40, 4, seed=9, inputs=LinearInput(2.5, 0.5), timing="next")
    for p in range(4):
        x = np.zeros(3)
        for k in range(40):
            y = int(batch.modes[p, k])
            x_next, z = step(sys, x, y, batch.inputs[p, k + 1])
            assert np.allclose(z, batch.outputs[p, k])
            x = x_next
            assert np.array_equal(x, batch.states[p, k + 1])


def test_current_timing_uses_u_k():
    sys, chain = fx.production()
    batch = simulate_batch(sys, chain, np.zeros(3), 1, 10, 2, seed=1, inputs=LinearInput(1.0), timing="current")
    x = np.zeros(3)
    for k in range(10):
        x, _ = step(sys, x, int(batch.modes[0, k]), batch.inputs[0, k])
    assert np.array_equal(x, batch.states[0, -1])


def test_paths_do_not_depend_on_batch_size():
    sys, chain = fx.mj_example()
    small = simulate_batch(sys, chain, [1.0, 1.0], 1, 30, 3, seed=2)
    big = simulate_batch(sys, chain, [1.0, 1.0], 1, 30, 8, seed=2)
    assert np.array_equal(small.states, big.states[:3])
    single = simulate(sys, chain, [1.0, 1.0], 1, 30, seed=2, stream=2)
    assert np.array_equal(single.states, big.states[2])
    assert np.array_equal(single.modes.modes, big.modes[2])


def test_replay_is_bitwise():
    sys, chain = fx.production()
    a = simulate_batch(sys, chain, np.zeros(3), 1, 50, 5, seed=3, inputs=LinearInput(2.5, 0.2))
    b = simulate_batch(sys, chain, np.zeros(3), 1, 50, 5, seed=3, inputs=LinearInput(2.5, 0.2))
    assert np.array_equal(a.states, b.states) and np.array_equal(a.inputs, b.inputs)


def test_jump_example_ten_paths():
    sys, chain = fx.mj_example()
    norms = _norms(simulate_batch(sys, chain, [1.0, 1.0], 1, 200, 10, seed=0).states, MAX_PRODUCT)
    # seed-pinned: the slowest of 10 paths is still at 2.2e-3 at k = 60
    assert math.isclose(norms[:, 60].max(), 0.0022236393520150147, rel_tol=1e-9)
    assert (norms[:, 200] < 1e-6).all()


def test_decay_fit_recovers_known_rate():
    # deterministic contraction by 1/2 per step
    sys, chain = JumpSystem([[[0.5, 0.0], [0.0, 0.5]]]), validate_chain([[1.0]])
    fit = fit_mean_norm_decay(sys, chain, [2.0, 1.0], 1, 3, 30)
    assert math.isclose(fit.a_hat, 2.0, rel_tol=1e-9)
    assert math.isclose(fit.L_hat, 1.0, rel_tol=1e-9)
    assert fit.residual < 1e-9


def test_decay_fit_degenerate():
    sys, chain = JumpSystem([[[0.0, 0.0], [0.0, 0.0]]]), validate_chain([[1.0]])
    with pytest.raises(DegenerateData):
        fit_mean_norm_decay(sys, chain, [1.0, 1.0], 1, 3, 30)


def test_identity_does_not_decay():
    sys, chain = fx.identity_system()
    fit = fit_mean_norm_decay(sys, chain, [1.0, 1.0], 1, 3, 30)
    assert math.isclose(fit.a_hat, 1.0)


def test_decay_requires_max_product():
    sys, chain = fx.production(with_io=False)
    with pytest.raises(AlgebraMismatch):
        fit_mean_norm_decay(sys, chain, np.zeros(3), 1, 3, 30)


def test_lyapunov_exponent_between_mode_rates_and_throughput():
    sys, chain = fx.production(with_io=False)
    ell = estimate_lyapunov_exponent(sys, chain, np.zeros(3), 1, 200, 500, seed=0)
    # each mode alone grows at 2 per step; certification at e^2.5 bounds the rate by 2.5
    assert 2.0 <= ell < 2.5


def test_growth_bound_sensitivity_is_monotone():
    sys, chain = fx.production(with_io=False)
    batch = simulate_batch(sys, chain, np.zeros(3), 1, 300, 200, seed=0)
    sens = as_bound_sensitivity(batch, math.exp(2.5), [0, 1, 5, 10, 50, 100])
    values = [sens[k] for k in (0, 1, 5, 10, 50, 100)]
    assert values == sorted(values)
    assert sens[0] == 0.0  # x_0 = 0 is not below 0
    assert check_as_bound(batch, math.exp(2.5), 50) >= 0.99


def test_throughput_contrast():
    sys, chain = fx.production()
    slow = throughput_lags(sys, chain, 2.5, 300, 100, seed=1)
    fast = throughput_lags(sys, chain, 1.0, 300, 100, seed=1)
    assert all(abs(s.slope_q99) < 0.01 for s in slow)
    assert all(s.slope_q99 > 0.5 for s in fast)
    assert all(s.median <= s.q95 <= s.q99 <= s.max for s in slow)


class TestBibipo:
    def setup_method(self):
        self.sys = JumpSystem(fx.MJ_A, B=[[1.0], [1.0]], C=[[1.0, 1.0]])
        self.chain = validate_chain(fx.MJ_CHAIN)

    def test_warns_without_certificate(self):
        with pytest.warns(UserWarning, match="not certified"):
            estimate_bibipo_bound(self.sys, self.chain, [1.0, 1.0], 1, 1.0, 0.05, 50, 50)

    def test_quiet_with_certificate(self):
        cert = verify_one_step(self.sys.free(), self.chain, fx.MJ_P)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            bound = estimate_bibipo_bound(self.sys, self.chain, [1.0, 1.0], 1, 1.0, 0.05, 200, 100, certificate=cert)
        assert bound.m_z == pytest.approx(1.2 * bound.raw_quantile)
        assert np.mean(bound.sup_norms <= bound.raw_quantile) >= 0.95

    @given(st.integers(0, 1000))
    def test_constant_input_dominates(self, seed):
        rng = np.random.default_rng(seed)
        u = rng.uniform(0, 1, (41, 1))
        low = simulate_batch(self.sys, self.chain, [1.0, 1.0], 1, 40, 3, seed, u)
        high = simulate_batch(self.sys, self.chain, [1.0, 1.0], 1, 40, 3, seed, np.ones((41, 1)))
        assert (low.outputs <= high.outputs).all()


class TestNonlinear:
    def test_zero_delta_is_linear(self):
        sys = JumpSystem([fx.NONLINEAR_A])
        traj = simulate_nonlinear_2d(fx.NONLINEAR_A, 0.0, [0.3, 0.7], 30)
        lin = simulate(sys, validate_chain([[1.0]]), [0.3, 0.7], 1, 30, seed=0)
        assert np.allclose(traj, lin.states, rtol=1e-12)

    def test_single_zero_coordinate(self):
        traj = simulate_nonlinear_2d(fx.NONLINEAR_A, fx.NONLINEAR_DELTA, [0.5, 0.0], 5)
        assert np.isfinite(traj).all()

    def test_zero_state(self):
        with pytest.raises(ZeroState):
            simulate_nonlinear_2d(fx.NONLINEAR_A, fx.NONLINEAR_DELTA, [0.0, 0.0], 5)


def test_linear_input_explicit_noise():
    u = LinearInput(2.0, np.array([0.0, 0.5, -0.5])).values(2, None)
    assert u[:, 0].tolist() == [0.0, 2.5, 3.5]


def test_trace_csv(tmp_path):
    sys, chain = fx.production()
    trace = simulate(sys, chain, np.zeros(3), 1, 5, seed=0, inputs=LinearInput(2.5))
    path = tmp_path / "t.csv"
    write_trace_csv(trace, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["k", "mode", "x_1", "x_2", "x_3", "u_1", "z_1"]
    assert len(rows) == 7
    assert float(rows[3][2]) == trace.states[2, 0]


def test_zero_state_trace():
    sys, chain = fx.mj_example()
    assert (simulate(sys, chain, [0.0, 0.0], 1, 20, seed=0).states == 0).all()


def test_one_mode_is_matrix_iteration():
    from maxjump import SemiringMatrix, mat_mul

    A = SemiringMatrix(fx.NONLINEAR_A)
    x = SemiringMatrix([[0.4], [0.9]])
    trace = simulate(JumpSystem([A]), validate_chain([[1.0]]), [0.4, 0.9], 1, 15, seed=0)
    for k in range(15):
        x = mat_mul(A, x)
        assert np.array_equal(trace.states[k + 1], x.values[:, 0])


def test_expanding_system_grows():
    sys, chain = JumpSystem([[[1.1, 1.2], [1.3, 1.1]], [[1.5, 1.1], [1.1, 1.2]]]), validate_chain(fx.MJ_CHAIN)
    assert fit_mean_norm_decay(sys, chain, [1.0, 1.0], 1, 20, 30).a_hat < 1


@pytest.mark.parametrize(
    "fixture, p, k0",
    [("mj", fx.MJ_P, 1), ("production", fx.PRODUCTION_P, 1), ("kstep", None, 2)],
)
def test_certified_decay_rate(fixture, p, k0):
    """a_hat is at least the rate guaranteed by the certificate, less 0.05."""
    from maxjump import SearchOptions, search_certificate, transform_system, verify_k_step

    if fixture == "mj":
        sys, chain = fx.mj_example()
    elif fixture == "production":
        sys, chain = fx.production(with_io=False)
        sys = transform_system(sys, math.exp(fx.PRODUCTION_T))
    else:
        sys, chain = fx.kstep_example()
        p = search_certificate(sys, chain, k0, SearchOptions()).p
    cert = verify_k_step(sys, chain, p, k0)
    fit = fit_mean_norm_decay(sys, chain, np.ones(sys.n), 1, 500, 60, seed=0)
    assert fit.a_hat >= cert.delta_max ** (-1 / k0) - 0.05


def test_lyapunov_exponent_scalar():
    from maxjump import MAX_PLUS

    sys = JumpSystem([[[1.0]]], algebra=MAX_PLUS)
    assert estimate_lyapunov_exponent(sys, validate_chain([[1.0]]), [0.0], 1, 3, 100) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_lyapunov_exponent_single_mode_is_cycle_mean(seed):
    from maxjump import MAX_PLUS, SemiringMatrix, max_cycle_mean

    A = np.random.default_rng(seed).normal(size=(4, 4))
    ell = estimate_lyapunov_exponent(JumpSystem([A], algebra=MAX_PLUS), validate_chain([[1.0]]), np.zeros(4), 1, 1, 400)
    assert abs(ell - max_cycle_mean(SemiringMatrix(A, MAX_PLUS))) <= 2 / 400


def test_as_bound_extremes():
    sys, chain = fx.production(with_io=False)
    batch = simulate_batch(sys, chain, np.zeros(3), 1, 100, 50, seed=0)
    assert check_as_bound(batch, math.exp(10.0), 1) == 1.0
    assert check_as_bound(batch, 1.0, 0) == 0.0


def test_single_mode_lags_converge():
    from maxjump import MAX_PLUS

    sys = JumpSystem([[[1.0, -math.inf], [0.5, 0.8]]], B=[[0.0], [0.0]], algebra=MAX_PLUS)
    batch = simulate_batch(sys, validate_chain([[1.0]]), np.zeros(2), 1, 100, 1, 0, LinearInput(1.5), timing="next")
    lags = batch.states[0] - 1.5 * np.arange(101)[:, None]
    assert np.array_equal(lags[-1], lags[-20])


class TestBibipoExamples:
    chain = validate_chain(fx.MJ_CHAIN)

    def test_zero_input_zero_state(self):
        sys = JumpSystem(fx.MJ_A, B=[np.eye(2)] * 2, C=[np.eye(2)] * 2)
        with pytest.warns(UserWarning):
            assert estimate_bibipo_bound(sys, self.chain, [0.0, 0.0], 1, 0.0, 0.05, 20, 30).m_z == 0.0

    def test_zero_output_matrix(self):
        sys = JumpSystem(fx.MJ_A, B=[np.zeros((2, 1))] * 2, C=[np.zeros((2, 2))] * 2)
        with pytest.warns(UserWarning):
            assert estimate_bibipo_bound(sys, self.chain, [1.0, 1.0], 1, 1.0, 0.05, 20, 30).m_z == 0.0

    def test_stable_across_seeds(self):
        sys = JumpSystem(fx.MJ_A, B=[np.eye(2)] * 2, C=[np.eye(2)] * 2)
        cert = verify_one_step(sys.free(), self.chain, fx.MJ_P)
        bounds = [
            estimate_bibipo_bound(sys, self.chain, [1.0, 1.0], 1, 1.0, 0.05, 200, 100, seed=s, certificate=cert).m_z
            for s in range(10)
        ]
        assert np.isfinite(bounds).all()
        assert np.std(bounds) / np.mean(bounds) < 0.1

    def test_monotone_in_eps_and_input(self):
        sys = JumpSystem(fx.MJ_A, B=[np.eye(2)] * 2, C=[np.eye(2)] * 2)
        cert = verify_one_step(sys.free(), self.chain, fx.MJ_P)

        def bound(eps, mu):
            return estimate_bibipo_bound(sys, self.chain, [1.0, 1.0], 1, mu, eps, 200, 60, seed=1, certificate=cert).m_z

        assert bound(0.01, 1.0) >= bound(0.05, 1.0) >= bound(0.2, 1.0)
        assert bound(0.05, 0.5) <= bound(0.05, 1.0) <= bound(0.05, 2.0)


def test_nonlinear_diagonal_start_matches_linear_step():
    x0 = [0.6, 0.6]
    traj = simulate_nonlinear_2d(fx.NONLINEAR_A, fx.NONLINEAR_DELTA, x0, 1)
    linear = simulate_nonlinear_2d(fx.NONLINEAR_A, 0.0, x0, 1)
    assert np.array_equal(traj[1], linear[1])
