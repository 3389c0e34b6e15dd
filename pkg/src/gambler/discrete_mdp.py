"""The discrete gambler MDP on {0, ..., N}: exact table, value iteration, Q-learning."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from gambler import kernels
from gambler.core_value import Params, value

RNG_ALGORITHM = "PCG64"
_CHUNK = 1 << 20


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DiscreteSpec:
    N: int
    params: Params

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")

    def actions(self, n: int) -> range:
        return range(1, min(n, self.N - n) + 1)


@dataclass
class ValueTable:
    values: np.ndarray
    iterations: int = 0
    final_delta: float = 0.0
    converged: bool = True
    exact: tuple[Fraction, ...] | None = None

    def __len__(self):
        return len(self.values)


def exact_table(spec: DiscreteSpec) -> ValueTable:
    """z(n) = v(n / N), evaluated in exact rational arithmetic."""
    exact = tuple(value(Fraction(n, spec.N), spec.params) for n in range(spec.N + 1))
    return ValueTable(np.array([float(z) for z in exact]), exact=exact)


def value_iteration(
    spec: DiscreteSpec,
    init: ValueTable | float | np.ndarray = 0.0,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
) -> ValueTable:
    """Synchronous sweeps until the sup-norm change drops below ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = spec.N
    if isinstance(init, ValueTable):
        z = np.array(init.values, dtype=np.float64)
    elif np.isscalar(init):
        z = np.full(N + 1, float(init))
    else:
        z = np.array(init, dtype=np.float64)
    if z.shape != (N + 1,):
        raise ValueError(f"initial table must have {N + 1} entries")
    z[0], z[N] = 0.0, 1.0
    p, g = spec.params.floats
    delta = float("inf")
    it = 0
    while it < max_iter:
        best, _ = kernels.bellman_backup(z, p, g, 1, 0.0)
        delta = float(np.max(np.abs(best - z[1:N])))
        z[1:N] = best
        it += 1
        if delta < tol:
            return ValueTable(z, it, delta, True)
    warnings.warn(
        f"value iteration stopped after {max_iter} sweeps with delta {delta:.3e}",
        ConvergenceWarning,
        stacklevel=2,
    )
    return ValueTable(z, it, delta, False)


def _backups(z: np.ndarray, n: int, spec: DiscreteSpec) -> np.ndarray:
    p, g = spec.params.floats
    a = np.arange(1, min(n, spec.N - n) + 1)
    return p * g * z[n - a] + (1 - p) * g * z[n + a]


def maximizers(table: ValueTable, spec: DiscreteSpec, n: int, tol: float = 1e-12) -> list[int]:
    """Every bet at state n whose backup is within ``tol`` of the best one."""
    if not 0 < n < spec.N:
        raise ValueError(f"state {n} is terminal")
    vals = _backups(np.asarray(table.values, dtype=np.float64), n, spec)
    return [int(a) + 1 for a in np.flatnonzero(vals >= vals.max() - tol)]


def greedy_policy(table: ValueTable, spec: DiscreteSpec, tie_tol: float = 1e-12) -> np.ndarray:
    """Greedy bet per state, ties broken toward the largest bet.

    Entries 0 and N are 0 (no bet at terminal states).
    """
    p, g = spec.params.floats
    _, act = kernels.bellman_backup(np.asarray(table.values, dtype=np.float64), p, g, 1, tie_tol)
    out = np.zeros(spec.N + 1, dtype=np.int64)
    out[1:spec.N] = act
    return out


@dataclass
class Schedule:
    """Decay a0 / (1 + t / tau)."""

    a0: float
    tau: float

    def __post_init__(self):
        if not (self.a0 > 0 and self.tau > 0):
            raise ValueError("schedule needs a0 > 0 and tau > 0")

    def __call__(self, t):
        return self.a0 / (1.0 + t / self.tau)

    @classmethod
    def coerce(cls, s) -> "Schedule":
        if isinstance(s, Schedule):
            return s
        if s is None or len(s) != 2:
            raise ValueError(f"schedule must be (a0, tau), got {s!r}")
        return cls(float(s[0]), float(s[1]))


@dataclass
class QTable:
    """Tabular action values; row n holds bets 1..min(n, N - n)."""

    N: int
    q: np.ndarray
    visits: np.ndarray

    @classmethod
    def zeros(cls, N: int) -> "QTable":
        shape = (N + 1, N // 2 + 1)
        return cls(N, np.zeros(shape), np.zeros(shape, dtype=np.int64))

    def row(self, n: int) -> np.ndarray:
        return self.q[n, 1:min(n, self.N - n) + 1]

    def rows(self) -> list[np.ndarray]:
        return [self.row(n) for n in range(1, self.N)]

    def visit_rows(self) -> list[np.ndarray]:
        return [self.visits[n, 1:min(n, self.N - n) + 1] for n in range(1, self.N)]

    def greedy_values(self) -> np.ndarray:
        """max_a q(n, a) with the terminal values 0 and 1 appended."""
        out = np.zeros(self.N + 1)
        out[self.N] = 1.0
        for n in range(1, self.N):
            out[n] = self.row(n).max()
        return out

    def greedy_actions(self) -> np.ndarray:
        out = np.zeros(self.N + 1, dtype=np.int64)
        for n in range(1, self.N):
            r = self.row(n)
            out[n] = np.flatnonzero(r == r.max())[-1] + 1
        return out


@dataclass
class QLearningResult:
    table: QTable
    returns: np.ndarray
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    alpha: Schedule = field(default=None)
    epsilon: Schedule = field(default=None)


def q_learning(
    spec: DiscreteSpec,
    episodes: int,
    alpha_schedule=(0.5, 1e4),
    epsilon_schedule=(0.5, 1e4),
    seed: int = 0,
    max_steps: int = 1000,
) -> QLearningResult:
    """Tabular Q-learning with exploring starts and epsilon-greedy behaviour.

    The step size decays with the visit count of the updated pair and the
    exploration rate with the episode index. Episodes longer than
    ``max_steps`` are cut off with return 0.
    """
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    alpha = Schedule.coerce(alpha_schedule)
    eps = Schedule.coerce(epsilon_schedule)
    p, g = spec.params.floats
    table = QTable.zeros(spec.N)
    returns = np.zeros(episodes)
    rng = np.random.Generator(np.random.PCG64(seed))
    chunk = max(_CHUNK, 4 * (1 + 3 * max_steps))
    ep = 0
    while ep < episodes:
        U = rng.random(chunk)
        ep, _ = kernels.qlearn_run(
            table.q, table.visits, returns, U, 0, ep, episodes, spec.N, p, g,
            alpha.a0, alpha.tau, eps.a0, eps.tau, max_steps,
        )
    return QLearningResult(table, returns, seed, RNG_ALGORITHM, alpha, eps)
