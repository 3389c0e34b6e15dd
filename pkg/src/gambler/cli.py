"""Command-line entry point: ``gambler <subcommand> ...``.

Exit codes: 0 on success, 1 on usage or validation errors, 2 when
``verify`` reports a failed check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from gambler import approx, discrete_mdp, simulate
from gambler.core_value import (
    Dyadic,
    Params,
    as_fraction,
    backward_diff,
    lattice_exact,
    lattice_values,
    value,
)
from gambler.verify import run_checks


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def rational(text: str) -> Fraction:
    try:
        return as_fraction(text.strip())
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {n}")
    return n


def schedule(text: str) -> tuple[float, float]:
    try:
        a0, tau = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a0,tau: {text!r}") from None
    return a0, tau


def _fmt(x):
    if isinstance(x, (Fraction, np.floating)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def emit(rows: list[dict], fmt: str, out) -> None:
    rows = [{k: _fmt(v) for k, v in row.items()} for row in rows]
    if fmt == "json":
        out.write(json.dumps(rows, indent=1) + "\n")
        return
    writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _params(args) -> Params:
    return Params(args.p, args.gamma)


def cmd_eval(args):
    v = value(args.s, _params(args), args.tol)
    if args.format is None:
        return None, repr(float(v))
    return [{"s": str(args.s), "v": v}], None


def cmd_table(args):
    P = _params(args)
    n = 1 << args.level
    vals = lattice_values(args.level, P) if args.fast else lattice_exact(args.level, P)
    return [{"s": str(Fraction(k, n)), "v": vals[k]} for k in range(n + 1)], None


def cmd_solve(args):
    spec = discrete_mdp.DiscreteSpec(args.n, _params(args))
    exact = discrete_mdp.exact_table(spec).values
    if args.method == "exact":
        return [{"n": n, "z_exact": exact[n]} for n in range(args.n + 1)], None
    vi = discrete_mdp.value_iteration(spec, 0.0, args.tol, args.max_iter).values
    return [
        {"n": n, "z_exact": exact[n], "z_vi": vi[n], "abs_err": abs(exact[n] - vi[n])}
        for n in range(args.n + 1)
    ], None


def cmd_qlearn(args):
    spec = discrete_mdp.DiscreteSpec(args.n, _params(args))
    res = discrete_mdp.q_learning(spec, args.episodes, args.alpha, args.epsilon, args.seed,
                                  args.max_steps)
    exact = discrete_mdp.exact_table(spec).values
    greedy = res.table.greedy_values()
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            emit([{"episode": i, "return": r} for i, r in enumerate(res.returns)], "csv", fh)
    return [
        {"n": n, "z_exact": exact[n], "q_greedy": greedy[n], "abs_err": abs(exact[n] - greedy[n])}
        for n in range(args.n + 1)
    ], None


def cmd_simulate(args):
    P = _params(args)
    est = simulate.mc_value(args.s0, args.policy, P, args.episodes, args.seed, args.cutoff)
    return [{
        "s0": str(args.s0),
        "policy": args.policy,
        "mean": est.mean,
        "stderr": est.stderr,
        "episodes": est.episodes,
        "truncations": est.truncation_count,
        "bias_bound": est.bias_bound,
        "v_exact": value(args.s0, P),
        "rng": est.rng_algorithm,
    }], None


def cmd_approx(args):
    P = _params(args)
    if args.kind == "lip":
        r = approx.lipschitz_bound(args.lipschitz, P)
        return [{"lipschitz": str(args.lipschitz), "h": r.h, "bound": r.bound}], None
    if args.bins is None:
        raise UsageError("approx pc needs --bins")
    level = args.bins.bit_length() - 1
    depth = args.depth if args.depth is not None else max(2 * level + 8, 20)
    r = approx.pc_error_exact(args.bins, P, depth)
    if args.per_bin:
        return [{"bin": b.bin, "median_value": b.median_value, "bin_error": b.bin_error}
                for b in r.per_bin], None
    return [{
        "bins": r.bins,
        "exact_error": r.exact_error,
        "brute_error": r.brute_error,
        "proof_formula_error": r.proof_formula_error,
        "leading_bound": r.leading_bound,
    }], None


def cmd_diff(args):
    d = Dyadic.from_value(args.s)
    r = backward_diff(d, args.level, _params(args))
    return [{
        "s": str(d),
        "level": r.level,
        "forward": "" if r.forward is None else r.forward,
        "backward": r.backward,
        "bound": r.bound,
        "tight": r.tight,
    }], None


def cmd_verify(args):
    results = run_checks(args.deep)
    lines = [f"{'PASS' if r.ok else 'FAIL'} {r.name}: {r.detail}" for r in results]
    code = 0 if all(r.ok for r in results) else 2
    return None, "\n".join(lines), code


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gambler", description="Exact and numerical tools for the continuous gambler problem.")
    io_opts = _Parser(add_help=False)
    io_opts.add_argument("--format", choices=("csv", "json"), default=None,
                         help="output format (default csv; eval prints a bare number)")
    io_opts.add_argument("--output", help="write output to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, **kw):
        return sub.add_parser(name, parents=[io_opts], **kw)

    def with_params(p):
        p.add_argument("--p", type=rational, required=True, help="loss probability, 1/2 <= p < 1")
        p.add_argument("--gamma", type=rational, default=Fraction(1), help="discount factor")
        return p

    p = with_params(command("eval", help="evaluate v(s)"))
    p.add_argument("--s", type=rational, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_eval)

    p = with_params(command("table", help="v on the lattice of level L"))
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--fast", action="store_true",
                   help="use the float kernel instead of correctly rounded exact values")
    p.set_defaults(func=cmd_table)

    p = with_params(command("solve", help="discrete MDP with target N"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("exact", "vi"), default="vi")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=positive_int, default=1_000_000)
    p.set_defaults(func=cmd_solve)

    p = with_params(command("qlearn", help="tabular Q-learning on the discrete MDP"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--episodes", type=positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=schedule, default=(0.5, 1e4), help="step size a0,tau")
    p.add_argument("--epsilon", type=schedule, default=(0.5, 1e4), help="exploration a0,tau")
    p.add_argument("--max-steps", type=positive_int, default=1000)
    p.add_argument("--trace", help="write the per-episode returns to this CSV file")
    p.set_defaults(func=cmd_qlearn)

    p = with_params(command("simulate", help="Monte-Carlo estimate of v(s0)"))
    p.add_argument("--s0", type=rational, required=True)
    p.add_argument("--policy", choices=("bold", "alt"), default="bold")
    p.add_argument("--episodes", type=positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cutoff", type=positive_int, default=64)
    p.set_defaults(func=cmd_simulate)

    p = command("approx", help="piecewise-constant and Lipschitz fit errors")
    p.add_argument("kind", choices=("pc", "lip"))
    with_params(p)
    p.add_argument("--bins", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--per-bin", action="store_true")
    p.add_argument("--lipschitz", type=rational, default=Fraction(1))
    p.set_defaults(func=cmd_approx)

    p = command("verify", help="run the invariant self-checks")
    p.add_argument("--deep", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = with_params(command("diff", help="left and right increments at a dyadic s"))
    p.add_argument("--s", type=rational, required=True)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=cmd_diff)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (ValueError, TypeError, ArithmeticError, UsageError) as exc:
        print(f"gambler {args.command}: error: {exc}", file=sys.stderr)
        return 1
    rows, text = result[:2]
    code = result[2] if len(result) > 2 else 0
    buf = io.StringIO()
    if rows is not None:
        emit(rows, args.format or "csv", buf)
    else:
        buf.write(f"{text}\n")
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
