"""Optimal bets and Bellman-residual checks for candidate value functions.

The Bellman operator on a lattice uses states k / 2**state_level and bets
from the (usually finer) lattice 2**-action_level, with the boundary values
f(0) = 0 and f(1) = 1 pinned.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from gambler import kernels
from gambler.core_value import (
    BitExpansion,
    Dyadic,
    Params,
    as_fraction,
    lattice_exact,
    lattice_values,
    q_value,
    value_dyadic,
)

SOLUTION_TOL = 1e-9
TIE_TOL = 1e-12


def _as_state(s) -> Fraction:
    if isinstance(s, Dyadic):
        return s.value
    if isinstance(s, BitExpansion):
        return s.value
    return as_fraction(s)


def optimal_action(s):
    """The bold bet min(s, 1 - s), optimal for every discount factor."""
    x = _as_state(s)
    if not 0 < x < 1:
        raise ValueError(f"state {x} is terminal or outside (0, 1)")
    a = min(x, 1 - x)
    return Dyadic.from_value(a) if isinstance(s, Dyadic) else a


def alt_optimal_action(s, params: Params) -> Dyadic:
    """The smallest-unit bet 2^-l at s in G_l minus G_(l-1), optimal when gamma = 1."""
    if params.gamma != 1:
        raise ValueError("the unit bet is optimal only for gamma = 1")
    d = s if isinstance(s, Dyadic) else Dyadic.from_value(_as_state(s))
    if not 0 < d.value < 1:
        raise ValueError(f"state {d} is terminal")
    a = Dyadic(1, d.level)
    gap = abs(q_value(d, a, params) - value_dyadic(d, params))
    if gap > TIE_TOL:
        raise ArithmeticError(f"unit bet at {d} falls short of v by {float(gap)}")
    return a


@dataclass(frozen=True)
class CandidateFn:
    """A member of a Bellman-solution family, with f(0) = 0 and f(1) = 1.

    kind is ``"exact_v"``, ``"constant"`` (f = C inside) or ``"linear"``
    (f = Cprime * s + Bprime inside).
    """

    kind: str
    C: float | None = None
    Cprime: float | None = None
    Bprime: float | None = None

    def __post_init__(self):
        if self.kind not in ("exact_v", "constant", "linear"):
            raise ValueError(f"unknown candidate kind {self.kind!r}")
        if self.kind == "constant" and self.C is None:
            raise ValueError("constant candidate needs C")
        if self.kind == "linear" and (self.Cprime is None or self.Bprime is None):
            raise ValueError("linear candidate needs Cprime and Bprime")

    @classmethod
    def exact_v(cls):
        return cls("exact_v")

    @classmethod
    def constant(cls, C):
        return cls("constant", C=float(C))

    @classmethod
    def linear(cls, Cprime, Bprime):
        return cls("linear", Cprime=float(Cprime), Bprime=float(Bprime))

    def claimed_solution(self, params: Params) -> bool:
        """Whether the family statement says this candidate solves the Bellman system."""
        if self.kind == "exact_v":
            return True
        if self.kind == "constant":
            return params.gamma == 1 and params.p > Fraction(1, 2) and self.C >= 1
        return params.gamma == 1 and params.p == Fraction(1, 2) and self.Cprime + self.Bprime >= 1

    def tabulate(self, level: int, params: Params) -> np.ndarray:
        """Values at k / 2**level for k = 0..2**level."""
        n = 1 << level
        if self.kind == "exact_v":
            return lattice_values(level, params)
        if self.kind == "constant":
            table = np.full(n + 1, self.C)
        else:
            table = self.Cprime * (np.arange(n + 1) / n) + self.Bprime
        table[0], table[n] = 0.0, 1.0
        return table

    def __str__(self):
        if self.kind == "constant":
            return f"constant(C={self.C})"
        if self.kind == "linear":
            return f"linear(C'={self.Cprime}, B'={self.Bprime})"
        return "exact_v"


class StateResidual(NamedTuple):
    state: Dyadic
    f: float
    backup: float
    residual: float
    action: Dyadic


@dataclass
class ResidualReport:
    max_residual: float
    argmax_state: Dyadic
    per_state: list[StateResidual]

    @property
    def solves(self) -> bool:
        return self.max_residual <= SOLUTION_TOL


def bellman_residual(f: CandidateFn, state_level: int, action_level: int, params: Params) -> ResidualReport:
    """|f(s) - max_a [p gamma f(s-a) + (1-p) gamma f(s+a)]| on G_state_level.

    Bets range over G_action_level; with action_level == state_level the state
    2^-l can only bet to the boundary, which is why constant solutions need a
    strictly finer bet lattice.
    """
    if state_level < 1:
        raise ValueError("state_level must be at least 1")
    if action_level < state_level:
        raise ValueError("action_level must be at least state_level")
    table = f.tabulate(action_level, params)
    return _residual_from_table(table, state_level, action_level, params)


def _residual_from_table(table, state_level, action_level, params) -> ResidualReport:
    p, g = params.floats
    stride = 1 << (action_level - state_level)
    best, act = kernels.bellman_backup(table, p, g, stride, TIE_TOL)
    fvals = table[stride:-1:stride]
    residual = np.abs(fvals - best)
    rows = [
        StateResidual(
            Dyadic((j + 1) * stride, action_level),
            float(fvals[j]),
            float(best[j]),
            float(residual[j]),
            Dyadic(int(act[j]), action_level),
        )
        for j in range(len(best))
    ]
    worst = int(np.argmax(residual))
    return ResidualReport(float(residual[worst]), rows[worst].state, rows)


@dataclass
class BellmanIterate:
    """Result of repeated grid Bellman backups.

    ``full`` lives on the bet lattice G_action_level (with endpoints) and
    ``table`` is its restriction to the state lattice. ``deltas`` holds the
    sup-norm change of ``table`` after each step; points of the finer lattice
    next to the boundary may move even when ``table`` is a fixed point.
    """

    table: np.ndarray
    full: np.ndarray
    deltas: list[float]
    state_level: int
    action_level: int


def _initial_table(f0, level: int, params: Params) -> np.ndarray:
    n = 1 << level
    if isinstance(f0, CandidateFn):
        return f0.tabulate(level, params).astype(np.float64)
    if callable(f0):
        table = np.array([float(f0(Fraction(k, n))) for k in range(n + 1)])
    elif np.isscalar(f0):
        table = np.full(n + 1, float(f0))
    else:
        table = np.array(f0, dtype=np.float64)
        if table.shape != (n + 1,):
            raise ValueError(f"initial table must have {n + 1} entries")
    table[0], table[n] = 0.0, 1.0
    return table


def iterate_bellman(
    f0: CandidateFn | Callable | float | np.ndarray,
    state_level: int,
    action_level: int,
    params: Params,
    steps: int,
) -> BellmanIterate:
    """Apply the synchronous grid Bellman operator ``steps`` times.

    ``f0`` may be a candidate, a callable of the state, a constant interior
    fill, or a table on G_action_level.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if action_level < state_level:
        raise ValueError("action_level must be at least state_level")
    p, g = params.floats
    full = _initial_table(f0, action_level, params)
    stride = 1 << (action_level - state_level)
    deltas = []
    for _ in range(steps):
        before = full[::stride].copy()
        best, _ = kernels.bellman_backup(full, p, g, 1, 0.0)
        full[1:-1] = best
        deltas.append(float(np.max(np.abs(full[::stride] - before))))
    return BellmanIterate(full[::stride].copy(), full, deltas, state_level, action_level)


def maximizing_actions(s, action_level: int, params: Params, tol=0) -> list[Fraction]:
    """All bets in G_action_level that maximise the one-step backup of v at s.

    Backups are compared in exact arithmetic; ``tol`` widens the tie window.
    """
    x = _as_state(s)
    if not 0 < x < 1:
        raise ValueError(f"state {x} is terminal")
    n = 1 << action_level
    bets = [Fraction(m, n) for m in range(1, int(min(x, 1 - x) * n) + 1)]
    if not bets:
        return []
    if (x * n).denominator == 1:
        table = lattice_exact(action_level, params)
        i = int(x * n)
        pg, qg = params.p * params.gamma, params.q * params.gamma
        vals = [pg * table[i - m] + qg * table[i + m] for m in range(1, len(bets) + 1)]
    else:
        vals = [q_value(x, a, params) for a in bets]
    top = max(vals)
    return [a for a, v in zip(bets, vals) if v >= top - tol]
