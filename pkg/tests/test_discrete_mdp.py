import itertools
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gambler.core_value import Params, value
from gambler.discrete_mdp import (
    ConvergenceWarning,
    DiscreteSpec,
    QTable,
    Schedule,
    exact_table,
    greedy_policy,
    maximizers,
    q_learning,
    value_iteration,
)
from oracles import policy_value
from strategies import params


def test_spec_rejects_small_n():
    with pytest.raises(ValueError):
        DiscreteSpec(1, Params(0.6))
    with pytest.raises(ValueError):
        DiscreteSpec(2.5, Params(0.6))


def test_exact_table_examples():
    t = exact_table(DiscreteSpec(4, Params(0.6, 1)))
    assert list(t.exact) == [0, F(4, 25), F(2, 5), F(16, 25), 1]
    assert exact_table(DiscreteSpec(100, Params(0.6, 1))).exact[50] == F(2, 5)
    z3 = exact_table(DiscreteSpec(3, Params(0.6, 1)))
    assert z3.exact[2] == F(10, 19)
    assert abs(z3.values[2] - 0.526316) < 1e-6


@pytest.mark.parametrize("p", [0.6, 0.9])
def test_plot_table_hits_dyadic_points(p):
    P = Params(p, 1)
    z = exact_table(DiscreteSpec(100, P)).exact
    for n, s in ((50, F(1, 2)), (25, F(1, 4)), (75, F(3, 4))):
        assert z[n] == value(s, P)


@given(st.integers(2, 40), params())
def test_exact_table_is_bold_policy_value(N, P):
    z = exact_table(DiscreteSpec(N, P)).values
    bets = [min(n, N - n) for n in range(N + 1)]
    assert np.abs(z - policy_value(N, bets, *P.floats)).max() < 1e-12


@given(st.integers(2, 40), params(gamma=1))
def test_exact_table_monotone_at_gamma_one(N, P):
    z = exact_table(DiscreteSpec(N, P)).values
    assert np.all(np.diff(z) >= 0) and z[0] == 0 and z[-1] == 1


def test_value_iteration_examples():
    spec = DiscreteSpec(16, Params(0.6, 1))
    exact = exact_table(spec).values
    vi = value_iteration(spec, 0.0, 1e-12)
    assert vi.converged and np.abs(vi.values - exact).max() < 1e-10
    vi2 = value_iteration(spec, 2.0, 1e-12)
    assert np.abs(vi2.values - exact).max() < 1e-10
    for p, g in ((0.6, 1), (0.75, 0.5)):
        with pytest.warns(ConvergenceWarning):
            one = value_iteration(DiscreteSpec(2, Params(p, g)), 0.0, 1e-12, max_iter=1)
        assert one.values[1] == pytest.approx((1 - p) * g, abs=1e-15)


def test_value_iteration_accepts_tables():
    spec = DiscreteSpec(8, Params(0.6, 0.9))
    start = exact_table(spec)
    vi = value_iteration(spec, start, 1e-12)
    assert vi.iterations == 1 and vi.final_delta < 1e-15
    with pytest.raises(ValueError):
        value_iteration(spec, np.zeros(3))
    with pytest.raises(ValueError):
        value_iteration(spec, 0.0, tol=0)


def test_value_iteration_reports_non_convergence():
    spec = DiscreteSpec(64, Params(0.6, 1))
    with pytest.warns(ConvergenceWarning):
        vi = value_iteration(spec, 2.0, 1e-14, max_iter=3)
    assert not vi.converged and vi.iterations == 3 and vi.final_delta >= 1e-14


GRID = list(itertools.product([0.55, 0.6, 0.75, 0.9], [1, 0.9, 0.5]))


@pytest.mark.parametrize("p, g", GRID)
@pytest.mark.parametrize("N", [2, 5, 17, 33, 64])
def test_value_iteration_matches_exact(N, p, g):
    spec = DiscreteSpec(N, Params(p, g))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        vi = value_iteration(spec, 0.0, 1e-12)
    assert np.abs(vi.values - exact_table(spec).values).max() < 1e-8


def test_greedy_policy_examples():
    spec = DiscreteSpec(8, Params(0.6, 1))
    table = exact_table(spec)
    for n in range(1, 8):
        assert min(n, 8 - n) in maximizers(table, spec, n)
    assert greedy_policy(table, spec)[4] == 4
    spec32 = DiscreteSpec(32, Params(0.6, 1))
    assert 1 in maximizers(exact_table(spec32), spec32, 15)
    with pytest.raises(ValueError):
        maximizers(table, spec, 0)


@given(st.integers(2, 48), params())
def test_bold_bet_always_greedy(N, P):
    spec = DiscreteSpec(N, P)
    table = exact_table(spec)
    greedy = greedy_policy(table, spec)
    assert greedy[0] == greedy[N] == 0
    for n in range(1, N):
        assert min(n, N - n) in maximizers(table, spec, n)
        assert greedy[n] == max(maximizers(table, spec, n))


def test_schedule_validation():
    assert Schedule(0.5, 10)(10) == 0.25
    for bad in ((), None, (0.5,), (0, 1), (1, -1)):
        with pytest.raises((ValueError, TypeError)):
            Schedule.coerce(bad)
    spec = DiscreteSpec(4, Params(0.6))
    with pytest.raises(ValueError):
        q_learning(spec, 10, alpha_schedule=())
    with pytest.raises(ValueError):
        q_learning(spec, 0)


def test_qtable_shape_is_ragged():
    t = QTable.zeros(9)
    rows = t.rows()
    assert [len(r) for r in rows] == [min(n, 9 - n) for n in range(1, 9)]


def test_q_learning_single_state_bandit():
    spec = DiscreteSpec(2, Params(0.6, 1))
    res = q_learning(spec, 50_000, alpha_schedule=(1.0, 1.0), seed=5)
    assert abs(res.table.q[1, 1] - 0.4) <= 0.01
    assert res.table.visits[1, 1] == 50_000
    assert set(np.unique(res.returns)) <= {0.0, 1.0}


def test_q_learning_deterministic_per_seed():
    spec = DiscreteSpec(8, Params(0.55, 0.9))
    a = q_learning(spec, 5_000, seed=3)
    b = q_learning(spec, 5_000, seed=3)
    c = q_learning(spec, 5_000, seed=4)
    assert np.array_equal(a.table.q, b.table.q) and np.array_equal(a.returns, b.returns)
    assert not np.array_equal(a.table.q, c.table.q)
    assert a.rng_algorithm == "PCG64"


def test_q_learning_entries_finite_and_bounded():
    spec = DiscreteSpec(10, Params(0.6, 0.9))
    res = q_learning(spec, 20_000, alpha_schedule=(0.5, 10), seed=1)
    for row in res.table.rows():
        assert np.all(np.isfinite(row)) and np.all((row >= 0) & (row <= 1))
    assert np.all((res.returns >= 0) & (res.returns <= 1))


def test_q_learning_converges_with_fast_averaging():
    spec = DiscreteSpec(8, Params(0.55, 0.9))
    res = q_learning(spec, 100_000, alpha_schedule=(0.5, 10), seed=2)
    err = np.abs(res.table.greedy_values() - exact_table(spec).values).max()
    assert err <= 0.05


def test_q_learning_max_steps_cuts_episodes():
    spec = DiscreteSpec(6, Params(0.6, 1))
    res = q_learning(spec, 2_000, seed=0, max_steps=1)
    assert res.table.visits.sum() == 2_000
