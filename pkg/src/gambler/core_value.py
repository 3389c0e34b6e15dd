"""Exact evaluation of the optimal value v(s) of the continuous Gambler's problem.

For s = 0.b1 b2 b3 ... in binary,

    v(s) = sum_i (1-p) * gamma**i * b_i * prod_{j<i} f(b_j),   f(0) = 1-p, f(1) = p,

with v(1) = 1. Every routine here works in exact rational arithmetic
(:class:`fractions.Fraction`) when its input is a terminating or eventually
periodic binary expansion, and falls back to a float truncation with a
stated tail bound otherwise.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from gambler import kernels

MAX_DEPTH = 4096


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, Decimal, string or float.

    Strings may be ``"num/den"`` or decimals (``"0.6"``, ``"1e-3"``). Floats are
    read through their shortest decimal repr, so ``0.6`` becomes ``3/5`` rather
    than the binary neighbour of 0.6.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, (str, Decimal)):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {x!r}") from exc
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, np.integer):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


@dataclass(frozen=True)
class Params:
    """Probability ``p`` of losing a bet and discount factor ``gamma``.

    Both are stored as exact fractions.
    """

    p: Fraction
    gamma: Fraction = Fraction(1)

    def __post_init__(self):
        p = as_fraction(self.p)
        gamma = as_fraction(self.gamma)
        if not Fraction(1, 2) <= p < 1:
            raise ValueError(f"p must satisfy 0.5 <= p < 1, got {p}")
        if not 0 <= gamma <= 1:
            raise ValueError(f"gamma must satisfy 0 <= gamma <= 1, got {gamma}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "gamma", gamma)

    @property
    def q(self) -> Fraction:
        """Probability of winning a bet."""
        return 1 - self.p

    def factor(self, bit: int) -> Fraction:
        return self.p if bit else 1 - self.p

    @property
    def floats(self) -> tuple[float, float]:
        return float(self.p), float(self.gamma)

    def __str__(self):
        return f"p={self.p}, gamma={self.gamma}"


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class Dyadic:
    """The dyadic rational k / 2**level in [0, 1], kept in lowest terms."""

    k: int
    level: int = 0

    def __post_init__(self):
        k, level = int(self.k), int(self.level)
        if level < 0 or k < 0 or k > (1 << level):
            raise ValueError(f"{self.k}/2^{self.level} is not in [0, 1]")
        if k == 0:
            level = 0
        else:
            shift = min((k & -k).bit_length() - 1, level)
            k >>= shift
            level -= shift
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "level", level)

    @classmethod
    def from_value(cls, x) -> "Dyadic":
        x = as_fraction(x)
        den = x.denominator
        if den & (den - 1):
            raise ValueError(f"{x} is not a dyadic rational")
        return cls(x.numerator, den.bit_length() - 1)

    @property
    def value(self) -> Fraction:
        return Fraction(self.k, 1 << self.level)

    def bits(self, level: int | None = None) -> tuple[int, ...]:
        """Binary digits b1..b_level of a point in [0, 1)."""
        if self.k == 1 and self.level == 0:
            raise ValueError("s = 1 has no terminating expansion in [0, 1)")
        level = self.level if level is None else level
        if level < self.level:
            raise ValueError(f"{self} needs at least {self.level} bits")
        k = self.k << (level - self.level)
        return tuple((k >> (level - i)) & 1 for i in range(1, level + 1))

    def __add__(self, other):
        return Dyadic.from_value(self.value + _dyadic_value(other))

    def __sub__(self, other):
        return Dyadic.from_value(self.value - _dyadic_value(other))

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.k == other.k and self.level == other.level
        try:
            return self.value == as_fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.value < _dyadic_value(other)

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return self.k / (1 << self.level)

    def __repr__(self):
        return f"Dyadic({self.k}, {self.level})"

    def __str__(self):
        return f"{self.k}/{1 << self.level}"


def _dyadic_value(x) -> Fraction:
    return x.value if isinstance(x, Dyadic) else as_fraction(x)


def _primitive(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for d in range(1, n):
        if n % d == 0 and period == period[:d] * (n // d):
            return period[:d]
    return period


@dataclass(frozen=True)
class BitExpansion:
    """Binary expansion 0.prefix(period)(period)... of a point in [0, 1].

    Expansions are normalized on construction: a trailing run of ones becomes
    the terminating form, periods are primitive and rotated as far left as
    possible, and terminating prefixes drop trailing zeros. ``whole=1`` encodes
    the state s = 1. ``truncated`` marks a prefix cut off before the period
    was found; such an expansion only fixes the first ``len(prefix)`` bits.
    """

    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] = ()
    truncated: bool = False
    whole: int = 0

    def __post_init__(self):
        prefix = tuple(int(b) for b in self.prefix)
        period = tuple(int(b) for b in self.period)
        if any(b not in (0, 1) for b in prefix + period):
            raise ValueError("bits must be 0 or 1")
        if self.whole not in (0, 1):
            raise ValueError("whole part must be 0 or 1")
        if self.truncated and period:
            raise ValueError("a truncated expansion has no period")
        whole = self.whole
        if not self.truncated:
            if period and all(b == 0 for b in period):
                period = ()
            elif period and all(b == 1 for b in period):
                period = ()
                zeros = [i for i, b in enumerate(prefix) if b == 0]
                if zeros:
                    prefix = prefix[: zeros[-1]] + (1,)
                else:
                    prefix, whole = (), whole + 1
            if period:
                period = _primitive(period)
                while prefix and prefix[-1] == period[-1]:
                    prefix = prefix[:-1]
                    period = (period[-1],) + period[:-1]
            else:
                while prefix and prefix[-1] == 0:
                    prefix = prefix[:-1]
        if whole > 1 or (whole == 1 and (prefix or period) and any(prefix + period)):
            raise ValueError("expansion exceeds 1")
        if whole == 1:
            prefix, period = (), ()
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "whole", whole)

    @classmethod
    def of(cls, x, depth: int = MAX_DEPTH) -> "BitExpansion":
        if isinstance(x, BitExpansion):
            return x
        x = _dyadic_value(x)
        return expand_binary(x.numerator, x.denominator, depth)

    @property
    def is_dyadic(self) -> bool:
        return not self.period and not self.truncated

    def bit(self, i: int) -> int:
        """The i-th binary digit (1-based)."""
        if self.whole:
            return 1
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.truncated:
            raise IndexError(f"bit {i} lies beyond the truncation depth")
        if not self.period:
            return 0
        return self.period[(i - len(self.prefix) - 1) % len(self.period)]

    @property
    def value(self) -> Fraction:
        if self.truncated:
            raise ValueError("truncated expansion has no exact value")
        if self.whole:
            return Fraction(1)
        head = sum(Fraction(b, 1 << i) for i, b in enumerate(self.prefix, 1))
        if not self.period:
            return head
        q = len(self.period)
        block = int("".join(map(str, self.period)), 2)
        return head + Fraction(block, ((1 << q) - 1) << len(self.prefix))

    def to_dyadic(self) -> Dyadic:
        if not self.is_dyadic:
            raise ValueError("expansion is not terminating")
        return Dyadic.from_value(self.value)

    def __str__(self):
        if self.whole:
            return "1"
        body = "".join(map(str, self.prefix))
        if self.period:
            body += "(" + "".join(map(str, self.period)) + ")"
        if self.truncated:
            body += "..."
        return "0." + body


def expand_binary(num: int, den: int, depth: int = MAX_DEPTH) -> BitExpansion:
    """Binary expansion of num/den by long division with period detection.

    If ``depth`` digits are produced before a remainder repeats, the result is
    the first ``depth`` digits flagged ``truncated``.
    """
    num, den = int(num), int(den)
    if den <= 0:
        raise ValueError("denominator must be positive")
    if num < 0 or num > den:
        raise ValueError(f"{num}/{den} is not in [0, 1]")
    if depth < 1:
        raise ValueError("depth must be positive")
    if num == den:
        return BitExpansion(whole=1)
    seen: dict[int, int] = {}
    bits: list[int] = []
    r = num
    while r:
        if r in seen:
            start = seen[r]
            return BitExpansion(tuple(bits[:start]), tuple(bits[start:]))
        if len(bits) == depth:
            return BitExpansion(tuple(bits), truncated=True)
        seen[r] = len(bits)
        r <<= 1
        if r >= den:
            bits.append(1)
            r -= den
        else:
            bits.append(0)
    return BitExpansion(tuple(bits))


def _consume(bits: Iterable[int], params: Params) -> tuple[Fraction, Fraction]:
    """Partial sum and carried scale gamma^m * prod f(b_j) after m digits.

    v(0.b1..bm t1 t2 ...) = partial + scale * v(0.t1 t2 ...).
    """
    q, g = params.q, params.gamma
    total = Fraction(0)
    scale = Fraction(1)
    for b in bits:
        scale = scale * g
        if b:
            total += q * scale
            scale = scale * params.p
        else:
            scale = scale * q
    return total, scale


def scale_factor(bits: Sequence[int], params: Params) -> Fraction:
    """gamma^l * prod_j ((1-p) + (2p-1) b_j): the height ratio of v on a dyadic cell."""
    return _consume(bits, params)[1]


def value_dyadic(d, params: Params) -> Fraction:
    """Exact v at a dyadic rational (finite sum)."""
    d = d if isinstance(d, Dyadic) else Dyadic.from_value(d)
    if d.k == 1 and d.level == 0:
        return Fraction(1)
    return _consume(d.bits(), params)[0]


def truncation_depth(params: Params, tol: float) -> int:
    """Smallest depth L whose geometric tail bound is at most ``tol`` (capped)."""
    p, g = float(params.p), float(params.gamma)
    head = (1 - p) * g
    if head == 0.0:
        return 0
    ratio = tol * (1 - g * p) / head
    if ratio >= 1:
        return 0
    depth = math.ceil(math.log(ratio) / math.log(g * p))
    return min(max(depth, 0), MAX_DEPTH)


def tail_bound(depth: int, params: Params) -> float:
    """Upper bound on the sum of terms i > depth."""
    p, g = float(params.p), float(params.gamma)
    return (1 - p) * g ** (depth + 1) * p**depth / (1 - g * p)


def value_expansion(bits: BitExpansion, params: Params, tol: float = 1e-12):
    """v at a binary expansion.

    Terminating and periodic expansions are summed in closed form and returned
    as exact fractions. A truncated expansion is summed in floating point to
    the depth that keeps the tail below ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if bits.whole:
        return Fraction(1)
    if not bits.truncated:
        head, scale = _consume(bits.prefix, params)
        if not bits.period:
            return head
        cycle, cycle_scale = _consume(bits.period, params)
        return head + scale * cycle / (1 - cycle_scale)
    depth = truncation_depth(params, tol)
    if len(bits.prefix) < depth:
        raise ValueError(
            f"expansion known to {len(bits.prefix)} bits; {depth} needed for tol={tol}"
        )
    p, g = params.floats
    total, scale = 0.0, 1.0
    for b in bits.prefix[:depth]:
        scale *= g
        if b:
            total += (1 - p) * scale
            scale *= p
        else:
            scale *= 1 - p
    return total


def value(s, params: Params, tol: float = 1e-12):
    """v(s) for a Dyadic, BitExpansion or any exact rational in [0, 1]."""
    if isinstance(s, Dyadic):
        return value_dyadic(s, params)
    if isinstance(s, BitExpansion):
        return value_expansion(s, params, tol)
    x = as_fraction(s)
    if not 0 <= x <= 1:
        raise ValueError(f"state {x} outside [0, 1]")
    den = x.denominator
    if den & (den - 1) == 0:
        return value_dyadic(Dyadic.from_value(x), params)
    return value_expansion(expand_binary(x.numerator, den), params, tol)


def _state(x) -> Fraction:
    if isinstance(x, BitExpansion):
        return x.value
    return _dyadic_value(x)


def q_value(s, a, params: Params) -> Fraction:
    """One-step backup p*gamma*v(s-a) + (1-p)*gamma*v(s+a) for a feasible bet."""
    s, a = _state(s), _state(a)
    if not (0 < a <= min(s, 1 - s)):
        raise ValueError(f"bet {a} is not feasible at state {s}")
    g = params.gamma
    return params.p * g * value(s - a, params) + params.q * g * value(s + a, params)


def forward_diff(s, level: int, params: Params) -> Fraction:
    """v(s + 2^-(level+1)) - v(s) for s on the level-``level`` lattice, in closed form."""
    d = s if isinstance(s, Dyadic) else Dyadic.from_value(s)
    if d.value == 1:
        raise ValueError("no right increment at s = 1")
    if d.level > level:
        raise ValueError(f"{d} is not on lattice level {level}")
    return params.q * params.gamma * scale_factor(d.bits(level), params)


@dataclass(frozen=True)
class DiffReport:
    """Increments of v around a lattice site and the lower bound on the left one.

    ``forward`` is None at s = 1 (no right neighbour).
    """

    site: Dyadic
    level: int
    forward: Fraction | None
    backward: Fraction
    bound: Fraction

    @property
    def tight(self) -> bool:
        return self.backward == self.bound


def backward_diff(s, level: int, params: Params) -> DiffReport:
    """Left increment v(s) - v(s - 2^-(level+1)) together with its closed-form lower bound."""
    d = s if isinstance(s, Dyadic) else Dyadic.from_value(s)
    if d.k == 0:
        raise ValueError("no left increment at s = 0")
    if d.level > level:
        raise ValueError(f"{d} is not on lattice level {level}")
    p, g = params.p, params.gamma
    step = Dyadic(1, level + 1)
    backward = value_dyadic(d, params) - value_dyadic(d - step, params)
    if d.value == 1:
        forward = None
        bound = (p * g) ** (level + 1)
    else:
        k = d.level  # position of the last 1 bit
        head = Fraction(1)
        for b in d.bits()[: k - 1]:
            head *= params.factor(b)
        bound = p ** (level - k + 1) * params.q * g ** (level + 1) * head
        forward = forward_diff(d, level, params)
    if backward < bound:
        raise ArithmeticError(f"left increment {backward} below its bound {bound}")
    return DiffReport(d, level, forward, backward, bound)


def self_similar_eval(sbar, level: int, tail, params: Params, tol: float = 1e-12):
    """v(sbar + 2^-level * t) = v(sbar) + scale * v(t), scale from the bits of sbar.

    ``tail = 1`` lands on the next lattice point and is exact only when
    gamma = 1 (v is continuous) or level = 0; otherwise it is rejected.
    """
    d = sbar if isinstance(sbar, Dyadic) else Dyadic.from_value(sbar)
    if d.level > level or (d.value == 1 and level > 0):
        raise ValueError(f"{d} is not a left lattice point at level {level}")
    t = _state(tail) if not (isinstance(tail, BitExpansion) and tail.truncated) else None
    if t is not None and not 0 <= t <= 1:
        raise ValueError(f"tail {t} outside [0, 1]")
    if t == 1 and level > 0 and params.gamma != 1:
        raise ValueError("tail = 1 crosses a discontinuity when gamma < 1")
    if level == 0:
        return value(tail, params, tol)
    scale = scale_factor(d.bits(level), params)
    return value_dyadic(d, params) + scale * value(tail, params, tol)


def left_limit_and_jump(s, params: Params) -> tuple[Fraction, Fraction]:
    """lim_{x -> s-} v(x) and the jump v(s) - that limit at a dyadic s > 0.

    The limit is v of the non-terminating expansion b1..b_{k-1} 0 111...
    """
    d = s if isinstance(s, Dyadic) else Dyadic.from_value(s)
    if d.k == 0:
        raise ValueError("s = 0 has no left neighbourhood")
    p, q, g = params.p, params.q, params.gamma
    ones = q * g / (1 - p * g)  # v(0.111...)
    if d.value == 1:
        left = ones
    else:
        bits = d.bits()
        head, scale = _consume(bits[:-1] + (0,), params)
        left = head + scale * ones
    return left, value_dyadic(d, params) - left


def mean_value(params: Params) -> Fraction:
    """The integral of v over [0, 1]: (1-p) gamma / (2 - gamma)."""
    return params.q * params.gamma / (2 - params.gamma)


def integral(lo, hi, params: Params) -> Fraction:
    """Exact integral of v over [lo, hi] for dyadic endpoints.

    Splits the interval into maximal aligned dyadic cells; on a cell of width
    2^-l starting at sbar the integral is 2^-l (v(sbar) + scale * mean_value).
    """
    try:
        a_d, b_d = Dyadic.from_value(_state(lo)), Dyadic.from_value(_state(hi))
    except ValueError as exc:
        raise ValueError("integral endpoints must be dyadic rationals") from exc
    if not a_d < b_d:
        raise ValueError("need lo < hi")
    top = max(a_d.level, b_d.level)
    a = a_d.k << (top - a_d.level)
    b = b_d.k << (top - b_d.level)
    mean = mean_value(params)
    total = Fraction(0)
    while a < b:
        width = (a & -a) if a else 1 << top
        while width > b - a:
            width >>= 1
        cell_level = top - (width.bit_length() - 1)
        start = Dyadic(a, top)
        bits = start.bits(cell_level)
        head, scale = _consume(bits, params)
        total += Fraction(width, 1 << top) * (head + scale * mean)
        a += width
    return total


class DerivativeReport(NamedTuple):
    left: str | None
    right: str | None
    left_witness: list[float]
    right_witness: list[float]
    rate: float | None


def _classify(rate: Fraction) -> str:
    if rate < 1:
        return "zero"
    if rate > 1:
        return "infinite"
    return "finite"


def derivative_class(s, params: Params, depth: int = 40) -> DerivativeReport:
    """One-sided derivative behaviour of v at s with finite-difference witnesses.

    Witnesses are the quotients (v(s) - v(s - 2^-L)) 2^L and
    (v(s + 2^-L) - v(s)) 2^L for L = 1..depth (where the neighbour exists).
    At a dyadic s the left derivative is infinite (a jump when gamma < 1,
    growth like (2p)^L when gamma = 1) and the right one vanishes. At an
    eventually periodic s both quotients scale per period by
    rate = (2 gamma)^q prod f(b) over the period: zero below 1, infinite above.
    Typical points (e.g. 2/3) have rate < 1; bit patterns dense in ones can
    exceed 1. ``s = 0`` has no left side and ``left`` is None there.
    """
    exp = BitExpansion.of(s)
    if exp.truncated:
        x = None
    else:
        x = exp.value
    if x is None:
        return DerivativeReport("undetermined", "undetermined", [], [], None)
    if not 0 <= x <= 1:
        raise ValueError(f"state {x} outside [0, 1]")
    vx = value(x, params)
    left_w, right_w = [], []
    for L in range(1, depth + 1):
        h = Fraction(1, 1 << L)
        if x - h >= 0:
            left_w.append(float((vx - value(x - h, params)) / h))
        if x + h <= 1:
            right_w.append(float((value(x + h, params) - vx) / h))
    g, p, q = params.gamma, params.p, params.q
    if exp.is_dyadic or exp.whole:
        if x == 0:
            left = None
        else:
            jump = left_limit_and_jump(Dyadic.from_value(x), params)[1]
            left = "infinite" if jump > 0 else _classify(2 * g * p)
        right = None if x == 1 else _classify(2 * g * q)
        rate = None
    else:
        cycle_scale = _consume(exp.period, params)[1]
        r = cycle_scale * 2 ** len(exp.period)
        left = right = _classify(r)
        rate = float(r) ** (1 / len(exp.period))
    return DerivativeReport(left, right, left_w, right_w, rate)


def lattice_exact(level: int, params: Params) -> list[Fraction]:
    """Exact v(k / 2^level), k = 0..2^level, built level by level.

    Uses v(s) = (1-p) gamma v(2s) for s < 1/2 and
    (1-p) gamma + p gamma v(2s-1) for s >= 1/2.
    """
    q, g = params.q, params.gamma
    qg, pg = q * g, params.p * g
    table = [Fraction(0), Fraction(1)]
    for _ in range(level):
        half = len(table) - 1
        lower = [qg * table[k] for k in range(half)]
        upper = [qg + pg * table[k] for k in range(half)]
        table = lower + upper + [Fraction(1)]
    return table


def lattice_values(level: int, params: Params) -> np.ndarray:
    """Float v(k / 2^level), k = 0..2^level, via the compiled kernel when available."""
    p, g = params.floats
    return kernels.lattice_values(level, p, g)


class ArcLength(NamedTuple):
    euclidean: float
    manhattan: Fraction


def arc_length(level: int, params: Params) -> ArcLength:
    """Polygonal arc lengths of v through the level-``level`` lattice."""
    if level < 1:
        raise ValueError("level must be at least 1")
    exact = lattice_exact(level, params)
    steps = [b - a for a, b in zip(exact, exact[1:])]
    manhattan = 1 + sum(abs(d) for d in steps)
    vals = lattice_values(level, params)
    dv = np.diff(vals)
    ds = 1.0 / (1 << level)
    euclidean = float(np.sum(np.hypot(ds, dv)))
    return ArcLength(euclidean, manhattan)


def gap_argmin(level: int, params: Params) -> Dyadic:
    """Minimizer of v(s) - s over the interior lattice points k / 2^level.

    Candidates within 1e-12 of the float minimum are compared exactly; ties go
    to the smallest s.
    """
    if level < 2:
        raise ValueError("level must be at least 2")
    n = 1 << level
    vals = lattice_values(level, params)[1:n] - np.arange(1, n) / n
    lowest = vals.min()
    candidates = np.flatnonzero(vals <= lowest + 1e-12) + 1
    best = min(
        candidates,
        key=lambda k: (value_dyadic(Dyadic(int(k), level), params) - Fraction(int(k), n), k),
    )
    return Dyadic(int(best), level)
