"""L1 error of the best piecewise-constant and Lipschitz fits to v.

On the dyadic bin [k/N, (k+1)/N) the value function is an affine copy of
itself, v = head_k + scale_k * v(t), so the best constant (the value at the
bin midpoint) leaves an error of width * scale_k * J with

    J = integral of |v(t) - v(1/2)| dt = (p gamma I + (1-p) gamma (1-I)) / 2,

where I is the mean of v over [0, 1]. Every quantity is an exact rational.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from gambler import kernels
from gambler.core_value import Params, as_fraction, lattice_exact, mean_value

_BRUTE_CHUNK = 1 << 22


class BinError(NamedTuple):
    bin: int
    median_value: Fraction
    bin_error: Fraction


@dataclass
class ApproxReport:
    """Piecewise-constant fit errors with N equal bins.

    ``exact_error`` is the optimum from self-similarity. ``proof_formula_error``
    sums the per-bin expression that uses the right endpoint value
    v((k+1)/N); the two agree at gamma = 1 and differ by the jumps otherwise.
    ``leading_bound`` is the leading-order lower bound
    (2 - gamma)(1-p) gamma / ((1 - p gamma) N), reported for comparison.
    """

    bins: int
    exact_error: Fraction
    brute_error: float | None
    leading_bound: float
    proof_formula_error: Fraction
    per_bin: list[BinError]


def _bin_level(N: int) -> int:
    if int(N) != N or N < 4 or N & (N - 1):
        raise ValueError(f"N must be a power of 2 and at least 4, got {N}")
    return int(N).bit_length() - 1


def _scales(level: int, params: Params) -> list[Fraction]:
    qg, pg = params.q * params.gamma, params.p * params.gamma
    out = [Fraction(1)]
    for _ in range(level):
        out = [qg * s for s in out] + [pg * s for s in out]
    return out


def bin_spread(params: Params) -> Fraction:
    """J: the L1 distance between v on [0, 1] and the constant v(1/2)."""
    p, q, g = params.p, params.q, params.gamma
    mean = mean_value(params)
    return (p * g * mean + q * g * (1 - mean)) / 2


def leading_bound(N: int, params: Params) -> float:
    p, g = params.floats
    return (2 - g) * (1 - p) * g / ((1 - p * g) * N)


def pc_error_exact(N: int, params: Params, brute_depth: int | None = None) -> ApproxReport:
    """Optimal L1 error of an N-bin piecewise-constant fit, N a power of 2."""
    level = _bin_level(N)
    heads = lattice_exact(level + 1, params)
    scales = _scales(level, params)
    width = Fraction(1, N)
    spread = bin_spread(params)
    qg = params.q * params.gamma
    lead = 1 - qg
    per_bin = []
    proof_total = Fraction(0)
    for k in range(N):
        left, mid, right = heads[2 * k], heads[2 * k + 1], heads[2 * k + 2]
        per_bin.append(BinError(k, mid, width * scales[k] * spread))
        proof_total += width / 2 * (lead * (mid - left) + qg * (right - mid))
    exact = sum((b.bin_error for b in per_bin), Fraction(0))
    brute = pc_error_brute(N, params, brute_depth) if brute_depth is not None else None
    return ApproxReport(N, exact, brute, leading_bound(N, params), proof_total, per_bin)


def pc_error_brute(N: int, params: Params, depth: int) -> float:
    """Left Riemann sum of |v - bin median| on the lattice of spacing 2^-depth."""
    level = _bin_level(N)
    if depth < 2 * level + 8:
        raise ValueError(f"depth must be at least {2 * level + 8} for N = {N}")
    p, g = params.floats
    per_bin = 1 << (depth - level)
    bins_per_chunk = max(1, _BRUTE_CHUNK // per_bin)
    total = 0.0
    for b0 in range(0, N, bins_per_chunk):
        nb = min(bins_per_chunk, N - b0)
        vals = kernels.lattice_values(depth, p, g, b0 * per_bin, nb * per_bin)
        vals = vals.reshape(nb, per_bin)
        med = np.median(vals, axis=1, keepdims=True)
        total += float(np.abs(vals - med).sum())
    return total / (1 << depth)


@dataclass(frozen=True)
class ClampedRamp:
    """clamp(slope (s - 1/2) + height / 2, 0, height)."""

    slope: float
    height: float

    def __call__(self, s):
        return np.clip(self.slope * (np.asarray(s, dtype=float) - 0.5) + self.height / 2,
                       0.0, self.height)


@dataclass(frozen=True)
class LipschitzReport:
    h: Fraction
    bound: Fraction
    ramp: ClampedRamp

    def step(self, s):
        """The unit step of height h at 1/2 that isolates the jump of v."""
        return np.where(np.asarray(s, dtype=float) >= 0.5, float(self.h), 0.0)


def lipschitz_bound(L, params: Params) -> LipschitzReport:
    """Lower bound h^2 / (4L) on the L1 error of any L-Lipschitz fit.

    h is the jump of v at 1/2; the bound is attained by the clamped ramp of
    slope L against the step of height h.
    """
    L = as_fraction(L)
    p, q, g = params.p, params.q, params.gamma
    h = q * g * (1 - g) / (1 - p * g)
    if L <= 0 or L < h:
        raise ValueError(f"Lipschitz constant must be positive and at least h = {float(h):.6g}")
    return LipschitzReport(h, h * h / (4 * L), ClampedRamp(float(L), float(h)))


def l1_to_step(fit, h: float, samples: int = 1 << 16) -> float:
    """Midpoint-rule L1 distance on [0, 1] between ``fit`` and the step of height h at 1/2."""
    s = (np.arange(samples) + 0.5) / samples
    step = np.where(s >= 0.5, h, 0.0)
    return float(np.abs(np.asarray(fit(s), dtype=float) - step).mean())
