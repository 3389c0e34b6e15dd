"""A self-check suite run by ``gambler verify``.

Each check returns ``(ok, detail)``; the suite prints one PASS/FAIL line per
check. ``deep=True`` widens the parameter grids and adds the sampling checks.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from gambler import approx, discrete_mdp, kernels, policy_bellman, simulate
from gambler.core_value import (
    Dyadic,
    Params,
    arc_length,
    backward_diff,
    integral,
    lattice_exact,
    lattice_values,
    left_limit_and_jump,
    mean_value,
    value,
)


class CheckResult(NamedTuple):
    name: str
    ok: bool
    detail: str


def _grid(deep):
    ps = (0.55, 0.6, 0.75, 0.9) if deep else (0.6, 0.9)
    gs = (1, 0.9, 0.5) if deep else (1, 0.9)
    return [Params(p, g) for p, g in itertools.product(ps, gs)]


def check_quarter_values(deep):
    worst = 0
    for P in _grid(deep):
        if P.gamma != 1:
            continue
        q = P.q
        want = {Fraction(1, 4): q * q, Fraction(1, 2): q, Fraction(3, 4): q + P.p * q}
        for s, v in want.items():
            if value(s, P) != v:
                return False, f"v({s}) wrong at {P}"
            worst = max(worst, abs(float(lattice_values(2, P)[int(s * 4)]) - float(v)))
    return worst <= 1e-14, f"float error {worst:.1e}"


def check_lattice_exact(deep):
    level = 12 if deep else 8
    worst = 0.0
    for P in _grid(deep):
        exact = np.array([float(x) for x in lattice_exact(level, P)])
        worst = max(worst, float(np.abs(exact - lattice_values(level, P)).max()))
    return worst <= 1e-14, f"max |float - exact| {worst:.1e}"


def check_monotone(deep):
    level = 16 if deep else 12
    for P in _grid(deep):
        if np.any(np.diff(lattice_values(level, P)) < 0):
            return False, f"decrease at {P}"
    return True, f"level {level}"


def check_jumps(deep):
    for P in _grid(deep):
        _, jump = left_limit_and_jump(Fraction(1, 2), P)
        if (jump == 0) != (P.gamma == 1):
            return False, f"jump {jump} at {P}"
    return True, "jump vanishes iff gamma = 1"


def check_claim_tightness(deep):
    level = 6
    for P in _grid(deep):
        for k in range(1, 1 << level):
            r = backward_diff(Dyadic(k, level), level, P)
            if r.tight != (P.gamma == 1):
                return False, f"tightness wrong at {r.site}, {P}"
    return True, "bound attained iff gamma = 1"


def check_integral(deep):
    for P in _grid(deep):
        if integral(0, 1, P) != mean_value(P):
            return False, f"integral mismatch at {P}"
        if P.gamma == 1 and mean_value(P) != P.q:
            return False, f"mean {mean_value(P)} at {P}"
    return True, "mean = (1-p) gamma / (2 - gamma)"


def check_arc_length(deep):
    levels = range(1, 17 if deep else 11)
    for P in _grid(deep):
        if P.gamma != 1:
            continue
        prev = 0.0
        for L in levels:
            a = arc_length(L, P)
            if a.manhattan != 2 or a.euclidean < prev:
                return False, f"level {L} at {P}"
            prev = a.euclidean
    return True, f"levels 1..{levels[-1]}"


def check_bellman_exact(deep):
    level = 10 if deep else 8
    worst = 0.0
    for P in _grid(deep):
        r = policy_bellman.bellman_residual(policy_bellman.CandidateFn.exact_v(), level, level, P)
        worst = max(worst, r.max_residual)
    return worst <= 1e-12, f"max residual {worst:.1e}"


def check_constant_family(deep):
    P = Params(0.6, 1)
    C = policy_bellman.CandidateFn
    for c in (1, 1.5, 3):
        if policy_bellman.bellman_residual(C.constant(c), 6, 7, P).max_residual > 1e-12:
            return False, f"C={c} not a fixed point"
    for c in (0.5, 0.9):
        r = policy_bellman.bellman_residual(C.constant(c), 6, 7, P)
        if r.per_state[-1].residual < float(P.q) * (1 - c) - 1e-12:
            return False, f"C={c} residual {r.max_residual}"
    return True, "C >= 1 solves, C < 1 fails next to 1"


def check_linear_family(deep):
    P = Params(0.5, 1)
    for cp, bp in ((1, 0), (0.5, 0.5), (2, 0)):
        f = policy_bellman.CandidateFn.linear(cp, bp)
        if policy_bellman.bellman_residual(f, 6, 7, P).max_residual > 1e-12:
            return False, f"({cp}, {bp}) fails"
    return True, "C' + B' >= 1 solves at p = 1/2"


def check_value_iteration(deep):
    N = 64 if deep else 24
    worst = 0.0
    for P in _grid(deep):
        spec = discrete_mdp.DiscreteSpec(N, P)
        vi = discrete_mdp.value_iteration(spec, 0.0, 1e-12)
        worst = max(worst, float(np.abs(vi.values - discrete_mdp.exact_table(spec).values).max()))
    return worst <= 1e-8, f"N={N}, max error {worst:.1e}"


def check_bold_greedy(deep):
    for P in _grid(deep):
        spec = discrete_mdp.DiscreteSpec(16, P)
        table = discrete_mdp.exact_table(spec)
        for n in range(1, 16):
            if min(n, 16 - n) not in discrete_mdp.maximizers(table, spec, n):
                return False, f"bold bet not greedy at n={n}, {P}"
    return True, "min(n, N-n) always maximises"


def check_approx(deep):
    Ns = (4, 8, 16, 32) if deep else (4, 8)
    worst = 0.0
    for P, N in itertools.product(_grid(deep), Ns):
        depth = max(2 * (N.bit_length() - 1) + 8, 16)
        r = approx.pc_error_exact(N, P, depth)
        worst = max(worst, abs(float(r.exact_error) - r.brute_error))
    return worst <= 1e-4, f"max |exact - brute| {worst:.1e}"


def check_lipschitz_jump(deep):
    for P in _grid(deep):
        h = approx.lipschitz_bound(1, P).h
        if h != left_limit_and_jump(Fraction(1, 2), P)[1]:
            return False, f"h mismatch at {P}"
    return True, "h equals the jump at 1/2"


def check_backends(deep):
    if kernels.BACKEND != "cython":
        return True, "compiled backend not built; skipped"
    py = kernels.backend_module("python")
    for P in _grid(deep):
        p, g = P.floats
        if not np.array_equal(py.lattice_values(10, p, g), kernels.lattice_values(10, p, g)):
            return False, f"lattice mismatch at {P}"
    return True, "bit-identical lattice tables"


def check_monte_carlo(deep):
    P = Params(0.6, 0.9)
    for s0 in (Fraction(1, 2), Fraction(11, 16)):
        est = simulate.mc_value(s0, "bold", P, 200_000, seed=11)
        err = abs(est.mean - float(value(s0, P)))
        if err > 4 * est.stderr:
            return False, f"s0={s0}: off by {err:.2e}"
    return True, "bold-policy estimates within 4 stderr"


def check_q_learning(deep):
    spec = discrete_mdp.DiscreteSpec(8, Params(0.55, 0.9))
    res = discrete_mdp.q_learning(spec, 100_000, alpha_schedule=(0.5, 10), seed=3)
    err = float(np.abs(res.table.greedy_values() - discrete_mdp.exact_table(spec).values).max())
    return err <= 0.05, f"sup error {err:.3f}"


CHECKS: list[tuple[str, Callable, bool]] = [
    ("quarter-values", check_quarter_values, False),
    ("lattice-exact", check_lattice_exact, False),
    ("monotone", check_monotone, False),
    ("jumps", check_jumps, False),
    ("claim-tightness", check_claim_tightness, False),
    ("integral", check_integral, False),
    ("arc-length", check_arc_length, False),
    ("bellman-exact", check_bellman_exact, False),
    ("constant-family", check_constant_family, False),
    ("linear-family", check_linear_family, False),
    ("value-iteration", check_value_iteration, False),
    ("bold-greedy", check_bold_greedy, False),
    ("approx-oracle", check_approx, False),
    ("lipschitz-jump", check_lipschitz_jump, False),
    ("backends", check_backends, False),
    ("monte-carlo", check_monte_carlo, True),
    ("q-learning", check_q_learning, True),
]


def run_checks(deep: bool = False) -> list[CheckResult]:
    results = []
    for name, fn, deep_only in CHECKS:
        if deep_only and not deep:
            continue
        try:
            ok, detail = fn(deep)
        except Exception as exc:  # a crash is a failed check, not an aborted suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return results
