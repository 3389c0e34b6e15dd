import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gambler import kernels
from gambler.kernels import backend_module

py = backend_module("python")
try:
    cy = backend_module("cython")
except ImportError:
    cy = None

needs_cython = pytest.mark.skipif(cy is None, reason="compiled kernels not built")
probs = st.floats(0.5, 0.99)
discounts = st.floats(0.0, 1.0)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        backend_module("fortran")


def test_lattice_boundaries():
    v = py.lattice_values(3, 0.6, 1.0)
    assert v[0] == 0.0 and v[-1] == 1.0 and len(v) == 9
    part = py.lattice_values(3, 0.6, 1.0, 2, 3)
    assert np.array_equal(part, v[2:5])


def test_bellman_backup_small():
    F = np.array([0.0, 0.16, 0.4, 0.64, 1.0])
    best, act = py.bellman_backup(F, 0.6, 1.0, 1, 1e-12)
    assert np.allclose(best, [0.16, 0.4, 0.64])
    assert list(act) == [1, 2, 1]
    best, act = py.bellman_backup(F, 0.6, 1.0, 2, 0.0)
    assert list(act) == [2]


@needs_cython
@given(st.integers(0, 14), probs, discounts, st.data())
def test_lattice_identical(level, p, g, data):
    n = (1 << level) + 1
    start = data.draw(st.integers(0, n - 1))
    count = data.draw(st.integers(-1, n - start))
    a = py.lattice_values(level, p, g, start, count)
    b = cy.lattice_values(level, p, g, start, count)
    assert np.array_equal(a, b)


@needs_cython
@given(st.integers(2, 200), probs, discounts, st.integers(1, 4), st.sampled_from([0.0, 1e-12]))
def test_bellman_identical(N, p, g, stride, tie):
    F = np.random.default_rng(N).random(N + 1)
    a = py.bellman_backup(F, p, g, stride, tie)
    b = cy.bellman_backup(F, p, g, stride, tie)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def _qlearn(mod, N, p, g, seed):
    U = np.random.default_rng(seed).random(50_000)
    Q = np.zeros((N + 1, N // 2 + 1))
    visits = np.zeros(Q.shape, dtype=np.int64)
    returns = np.zeros(2000)
    out = mod.qlearn_run(Q, visits, returns, U, 0, 0, 2000, N, p, g, 0.5, 10.0, 0.5, 100.0, 50)
    return out, Q, visits, returns


@needs_cython
@given(st.integers(2, 16), probs, discounts, st.integers(0, 1000))
def test_qlearn_identical(N, p, g, seed):
    a, b = _qlearn(py, N, p, g, seed), _qlearn(cy, N, p, g, seed)
    assert tuple(a[0]) == tuple(b[0])
    for x, y in zip(a[1:], b[1:]):
        assert np.array_equal(x, y)


def _simulate(mod, den, n0, p, g, seed):
    U = np.random.default_rng(seed).random(20_000)
    n = np.arange(den + 1)
    bets = np.minimum(n, den - n).astype(np.int64)
    out = [np.zeros(500), np.zeros(500, dtype=np.int64), np.zeros(500, dtype=np.int64)]
    pos = mod.simulate_run(bets, n0, den, p, g, 30, U, 0, 0, 500, *out)
    return pos, out


@needs_cython
@given(st.integers(2, 40).flatmap(lambda d: st.tuples(st.just(d), st.integers(1, d - 1))),
       probs, discounts, st.integers(0, 1000))
def test_simulate_identical(dn, p, g, seed):
    den, n0 = dn
    a, b = _simulate(py, den, n0, p, g, seed), _simulate(cy, den, n0, p, g, seed)
    assert tuple(a[0]) == tuple(b[0])
    for x, y in zip(a[1], b[1]):
        assert np.array_equal(x, y)


def test_kernels_stop_before_buffer_runs_out():
    U = np.random.default_rng(0).random(10)
    out = [np.zeros(100), np.zeros(100, dtype=np.int64), np.zeros(100, dtype=np.int64)]
    bets = np.array([0, 1, 1, 0], dtype=np.int64)
    ep, pos = py.simulate_run(bets, 1, 3, 0.6, 1.0, 8, U, 0, 0, 100, *out)
    assert pos + 8 > 10 and ep < 100
