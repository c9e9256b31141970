"""The compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxjump import _kernels, _pykernels

try:
    from maxjump import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def _chain(rng, M):
    c = rng.random((M, M)) * (rng.random((M, M)) < 0.7)
    c[:, 0] += 1e-3
    return c / c.sum(axis=1, keepdims=True)


def _cum(c):
    cum = np.cumsum(c, axis=1)
    for y in range(c.shape[0]):
        cum[y, np.flatnonzero(c[y] > 0)[-1] :] = np.inf
    return np.ascontiguousarray(cum)


@needs_ext
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_sample_chain(seed, M):
    rng = np.random.default_rng(seed)
    cum = _cum(_chain(rng, M))
    u = rng.random(200)
    y0 = int(rng.integers(M))
    assert np.array_equal(np.asarray(_ckernels.sample_chain(cum, u, y0)), _pykernels.sample_chain(cum, u, y0))


@needs_ext
@given(st.integers(0, 2**32 - 1), st.booleans(), st.booleans())
def test_propagate(seed, maxplus, with_drive):
    rng = np.random.default_rng(seed)
    M, n, N, H = 3, 3, 4, 25
    if maxplus:
        A = np.where(rng.random((M, n, n)) < 0.3, -np.inf, rng.normal(size=(M, n, n)))
        x0 = rng.normal(size=(N, n))
        drive = rng.normal(size=(N, H, n)) if with_drive else None
    else:
        A = rng.uniform(0, 1.2, (M, n, n)) * (rng.random((M, n, n)) < 0.7)
        x0 = rng.uniform(0, 1, (N, n))
        drive = rng.uniform(0, 1, (N, H, n)) if with_drive else None
    modes = rng.integers(0, M, (N, H + 1)).astype(np.int64)
    got = np.asarray(_ckernels.propagate(A, modes, x0, drive, maxplus))
    assert np.array_equal(got, _pykernels.propagate(A, modes, x0, drive, maxplus))


@needs_ext
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
def test_kstep_deltas(seed, M, n, k0):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0, 2, (M, n, n)) * (rng.random((M, n, n)) < 0.8)
    c = _chain(rng, M)
    P = rng.uniform(0.1, 5, (M, n))
    got = np.asarray(_ckernels.kstep_deltas(A, c, P, k0))
    assert np.allclose(got, _pykernels.kstep_deltas(A, c, P, k0), rtol=1e-12, atol=1e-300)


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")
    forced = os.environ.get("MAXJUMP_PURE_PYTHON", "") in ("1", "true", "yes")
    if _ckernels is not None:
        assert _kernels.BACKEND == ("python" if forced else "cython")


def test_environment_forces_fallback():
    env = dict(os.environ, MAXJUMP_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import maxjump; print(maxjump.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"
