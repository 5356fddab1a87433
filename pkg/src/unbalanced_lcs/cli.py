"""Command-line entry point: ``unbalanced-lcs <command> [options]``.

Exit codes: 0 success, 1 a verification row failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import secrets
import sys
from pathlib import Path

from . import estimators as est
from . import verify
from .games import chain as gchain
from .games import delta as gdelta
from .games import walk as gwalk
from .report import FAIL, EstimateReport, reports_to_csv
from .rng import RngStream

DP_MAX_TURNS = 20_000
LUEKER_BAND = ("0.788071", "0.826280")


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _add_run_options(p: argparse.ArgumentParser, *, samples: bool = True) -> None:
    if samples:
        p.add_argument("--samples", type=_positive, default=10_000, help="independent samples (default 10000)")
    p.add_argument("--seed", type=int, help="master seed (random and printed when omitted)")
    p.add_argument("--threads", type=_positive, help=f"worker threads (default ${est.THREADS_ENV} or all cores)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unbalanced-lcs",
                                     description="LCS of unbalanced random words: estimators, exact games, checks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gamma", help="mean LCS(w,w')/n for two uniform words of length n")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=_positive, required=True)
    _add_run_options(p)

    p = sub.add_parser("gamma-eps", help="mean LCS(w,w')/n with |w'| = (1-eps)kn")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=_positive, required=True)
    _add_run_options(p)

    p = sub.add_parser("drift", help="mean P_d(L) - P_0(L) of the particle dynamics")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=_non_negative, required=True)
    p.add_argument("--L", type=_non_negative, required=True)
    _add_run_options(p)

    p = sub.add_parser("lnds", help="mean longest non-decreasing subsequence of a uniform word")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--p", type=float, help="draw the length from Binom(n, p) instead of fixing it")
    _add_run_options(p)

    p = sub.add_parser("tail", help="frequency of many non-trivial expectant partitions")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=_non_negative, required=True)
    p.add_argument("--L", type=_non_negative, required=True)
    _add_run_options(p)

    p = sub.add_parser("concat", help="block concatenation lower-bound construction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--d", type=_non_negative, default=1)
    p.add_argument("--alpha", type=float, default=1 / math.sqrt(7))
    p.add_argument("--L0", type=_positive, required=True)
    p.add_argument("--n", type=_positive, required=True)
    _add_run_options(p)

    p = sub.add_parser("verify", help="run a verification suite and print its PASS/FAIL table")
    p.add_argument("suite", help=f"one of: {', '.join(verify.SUITES)}")
    p.add_argument("--k", type=int, help="alphabet size (chain suite only)")
    _add_run_options(p, samples=False)

    p = sub.add_parser("chain", help="the reduced chain: stationary law or star probability")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--star", action="store_true", help="print the star probability only")
    p.add_argument("--export", type=Path, help="write the chain as JSON")

    p = sub.add_parser("walk", help="E|walk| after T steps from 1/2, exactly")
    p.add_argument("--T", type=_non_negative, required=True)

    p = sub.add_parser("game-dp", help="optimal value of the Delta-game by backward induction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--L", type=_non_negative, required=True)
    p.add_argument("--second-moment", action="store_true", help="maximise E[(Delta-1/2)^2] instead")
    return parser


# --- commands ------------------------------------------------------------------


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        output.write_text(text, newline="")


def _estimate(args: argparse.Namespace) -> EstimateReport:
    rng = RngStream(args.seed)
    t = args.threads
    cmd = args.command
    if cmd == "gamma":
        return est.estimate_gamma(args.k, args.n, args.samples, rng, threads=t)
    if cmd == "gamma-eps":
        return est.estimate_gamma_eps(args.k, args.eps, args.n, args.samples, rng, threads=t)
    if cmd == "drift":
        return est.estimate_drift(args.k, args.d, args.L, args.samples, rng, threads=t)
    if cmd == "lnds":
        if args.p is None:
            return est.estimate_lnds_mean(args.k, args.n, args.samples, rng, threads=t)
        return est.estimate_lnds_binomial(args.k, args.n, args.p, args.samples, rng, threads=t)
    if cmd == "tail":
        if args.k < 2:
            raise ValueError("k must be at least 2")
        return est.estimate_nontrivial_tail(args.k, args.d, args.L, args.samples, rng, threads=t)
    if cmd == "concat":
        return est.estimate_concat_lower(args.k, args.eps, args.d, args.alpha, args.L0, args.n, args.samples,
                                         rng, threads=t)
    raise AssertionError(cmd)


def _summary(report: EstimateReport) -> str:
    line = report.summary()
    if report.quantity == "gamma" and report.params.get("k") == 2:
        lo, hi = LUEKER_BAND
        line += f"  [reference band {lo} <= gamma_2 <= {hi}]"
    return line


def cmd_estimate(args: argparse.Namespace) -> int:
    try:
        report = _estimate(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = report.to_json() if args.format == "json" else reports_to_csv([report])
    _emit(text, args.output)
    print(_summary(report), file=sys.stderr)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite not in verify.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(verify.SUITES)}")
    overrides = {}
    if args.k is not None:
        if args.suite != "chain":
            raise UsageError("--k applies to the chain suite only")
        if args.k < 2:
            raise UsageError("k must be at least 2")
        overrides["k"] = [args.k]
    checks = verify.run_suite(args.suite, args.seed, threads=args.threads, **overrides)
    for c in checks:
        print(c.line())
    failed = sum(c.status == FAIL for c in checks)
    print(f"{args.suite}: {len(checks)} rows, {failed} failed, seed={args.seed}", file=sys.stderr)
    if args.output is not None:
        if args.format == "json":
            text = verify.suite_json(args.suite, args.seed, checks, **overrides)
        else:
            text = verify.suite_csv(checks)
        _emit(text, args.output)
    return 1 if failed else 0


def cmd_chain(args: argparse.Namespace) -> int:
    if args.k < 2:
        raise UsageError("k must be at least 2")
    spec = gchain.trivial_chain_spec(args.k)
    if args.export is not None:
        args.export.write_text(spec.to_json() + "\n")
    if args.star:
        print(gchain.star_probability(args.k))
        return 0
    pi = gchain.stationary_distribution(spec, exact=True)
    for (s, b), value in zip(spec.states, pi):
        print(f"({s},{b})\t{value}")
    print(f"star\t{gchain.star_probability(args.k)}")
    return 0


def cmd_walk(args: argparse.Namespace) -> int:
    print(gwalk.random_walk_abs_expectation(args.T))
    return 0


def cmd_game_dp(args: argparse.Namespace) -> int:
    if args.k < 2:
        raise UsageError("k must be at least 2")
    if args.L > DP_MAX_TURNS:
        raise UsageError(f"L={args.L} exceeds the DP cap of {DP_MAX_TURNS} turns")
    if args.second_moment:
        value = gdelta.delta_game_second_moment(args.k, args.L)
        bound = 0.25 + 2 * args.L / args.k
    else:
        value = gdelta.delta_game_optimal_value(args.k, args.L)
        bound = math.sqrt(2 * args.L / args.k) + 1
    print(f"{round(value, 12)!r} (bound {round(bound, 12)!r})")
    return 0


COMMANDS = {
    "gamma": cmd_estimate, "gamma-eps": cmd_estimate, "drift": cmd_estimate, "lnds": cmd_estimate,
    "tail": cmd_estimate, "concat": cmd_estimate, "verify": cmd_verify,
    "chain": cmd_chain, "walk": cmd_walk, "game-dp": cmd_game_dp,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if hasattr(args, "seed"):
        if args.seed is None:
            args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
