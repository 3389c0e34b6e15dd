"""Monte-Carlo episodes of the continuous gambler chain.

States are kept as integers over a fixed denominator, so bets and
transitions stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

import numpy as np

from gambler import kernels
from gambler.core_value import BitExpansion, Dyadic, Params, as_fraction

RNG_ALGORITHM = "PCG64"
OUTCOMES = {1: "reached-1", 0: "reached-0", 2: "truncated"}
_CHUNK = 1 << 20


@dataclass(frozen=True)
class EpisodeResult:
    outcome: str
    steps: int
    discounted_return: float

    @property
    def truncated(self) -> bool:
        return self.outcome == "truncated"


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    episodes: int
    truncation_count: int
    bias_bound: float
    mean_steps: float
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def truncation_rate(self) -> float:
        return self.truncation_count / self.episodes


def _start(s0) -> Fraction:
    if isinstance(s0, (Dyadic, BitExpansion)):
        x = s0.value
    else:
        x = as_fraction(s0)
    if not 0 < x < 1:
        raise ValueError(f"start state {x} must lie strictly inside (0, 1)")
    return x


def bet_table(s0, policy) -> tuple[int, int, np.ndarray]:
    """Resolve ``policy`` into (n0, den, bets) with s0 = n0 / den.

    ``policy`` is ``"bold"``, ``"alt"`` (bet the lowest set bit, dyadic
    starts only) or a sequence of integer bets indexed by 0..den, where den
    is any multiple of the denominator of s0.
    """
    x = _start(s0)
    if isinstance(policy, str):
        den = x.denominator
        n = np.arange(den + 1, dtype=np.int64)
        if policy == "bold":
            bets = np.minimum(n, den - n)
        elif policy == "alt":
            if den & (den - 1):
                raise ValueError("the alt policy needs a dyadic start state")
            bets = n & -n
            bets[den] = 0
        else:
            raise ValueError(f"unknown policy {policy!r}")
        return x.numerator, den, bets
    bets = np.asarray(policy)
    if bets.ndim != 1 or bets.shape[0] < 3:
        raise ValueError("a bet table needs entries for 0..den with den >= 2")
    if not np.issubdtype(bets.dtype, np.integer):
        if not np.all(np.equal(np.mod(bets, 1), 0)):
            raise ValueError("bet table entries must be integers")
        bets = bets.astype(np.int64)
    den = bets.shape[0] - 1
    n0 = x * den
    if n0.denominator != 1:
        raise ValueError(f"start state {x} is not on the table grid 1/{den}")
    inner = np.arange(1, den)
    b = bets[1:den]
    if np.any(b < 1) or np.any(b > np.minimum(inner, den - inner)):
        bad = int(inner[(b < 1) | (b > np.minimum(inner, den - inner))][0])
        raise ValueError(f"bet {int(bets[bad])} at state {bad}/{den} is infeasible")
    return int(n0), den, bets.astype(np.int64)


def run_episode(s0, policy, params: Params, cutoff: int, rng: np.random.Generator) -> EpisodeResult:
    """One episode; each step draws a uniform and loses the bet if it falls below p."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    n, den, bets = bet_table(s0, policy)
    p, g = params.floats
    t, disc = 0, 1.0
    while 0 < n < den and t < cutoff:
        a = int(bets[n])
        n = n - a if rng.random() < p else n + a
        t += 1
        disc *= g
    if n == den:
        return EpisodeResult("reached-1", t, disc)
    return EpisodeResult("reached-0" if n == 0 else "truncated", t, 0.0)


def mc_value(
    s0,
    policy,
    params: Params,
    episodes: int,
    seed: int = 0,
    cutoff: int = 64,
) -> McEstimate:
    """Mean discounted return over seeded episodes.

    Truncated episodes score 0. ``bias_bound`` is (gamma p)^cutoff for the
    bold policy and gamma^cutoff otherwise.
    """
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    n0, den, bets = bet_table(s0, policy)
    p, g = params.floats
    returns = np.zeros(episodes)
    steps = np.zeros(episodes, dtype=np.int64)
    outcomes = np.zeros(episodes, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(seed))
    chunk = max(_CHUNK, 4 * cutoff)
    ep = 0
    while ep < episodes:
        U = rng.random(chunk)
        ep, _ = kernels.simulate_run(bets, n0, den, p, g, cutoff, U, 0, ep, episodes,
                                     returns, steps, outcomes)
    stderr = float(np.std(returns, ddof=1)) / sqrt(episodes) if episodes > 1 else 0.0
    bold = isinstance(policy, str) and policy == "bold"
    bias = (g * p) ** cutoff if bold else g ** cutoff
    return McEstimate(
        float(np.mean(returns)),
        stderr,
        episodes,
        int(np.count_nonzero(outcomes == 2)),
        bias,
        float(np.mean(steps)),
    )
