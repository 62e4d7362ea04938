"""Command-line entry point.

Exit codes: 0 success, 2 usage or domain error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import analytics, oracle, regions, simulator
from .analytics import CycleLaw, MinerParams, Strategy
from .errors import DomainError, NumericError, RangeError

SEED_ENV = "WITHHOLDING_SEED"
DIST_MAX = 50
EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _strategy(text: str) -> Strategy:
    try:
        return Strategy.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise DomainError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="withholding",
                     description="Apparent hashrates of selfish and stubborn mining strategies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, gamma=True, strategy=True):
        if strategy:
            p.add_argument("--strategy", type=_strategy, required=True, help="hm, sm, efsm or lsm")
        p.add_argument("--q", type=float, required=True, help="attacker hashrate share, 0 <= q < 1/2")
        if gamma:
            p.add_argument("--gamma", type=float, default=0.0, help="connectivity in [0, 1] (default 0)")
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = sub.add_parser("analytic", help="closed-form E[L], E[Z] and apparent hashrate")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the cycle statistics")
    common(p)
    p.add_argument("--cycles", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None,
                   help=f"root seed; defaults to ${SEED_ENV} or 0")
    p.add_argument("--mode", choices=simulator.MODES, default=simulator.EXPECTED_Z)
    p.add_argument("--workers", type=int, default=1, help="threads; does not change the result")

    p = sub.add_parser("dist", help="cycle-length PMF, closed form against exhaustive enumeration")
    common(p)
    p.add_argument("--n-max", type=int, default=10)

    p = sub.add_parser("threshold", help="smallest q at which a strategy beats honest mining")
    p.add_argument("--strategy", type=_strategy, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = sub.add_parser("regionmap", help="dominant strategy over the (q, gamma) grid")
    p.add_argument("--q-steps", type=int, default=101)
    p.add_argument("--gamma-steps", type=int, default=101)
    p.add_argument("--q-max", type=float, default=0.499)
    p.add_argument("--csv", dest="csv_path", default="regionmap.csv")
    p.add_argument("--ppm", dest="ppm_path", default="regionmap.ppm")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    return parser


def _emit(record: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(record) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(record.keys())
        w.writerow(record.values())
    else:
        width = max(map(len, record))
        for k, v in record.items():
            out.write(f"{k:<{width}}  {v}\n")


def _emit_table(rows: list[dict], meta: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps({**meta, "rows": rows}) + "\n")
        return
    w = csv.writer(out, lineterminator="\n", delimiter="," if fmt == "csv" else "\t")
    w.writerow(rows[0].keys())
    for r in rows:
        w.writerow("" if v is None else v for v in r.values())


def cmd_analytic(args, out) -> int:
    params = MinerParams(args.q, args.gamma)
    b = analytics.apparent_hashrate(CycleLaw(args.strategy, params))
    _emit({"strategy": args.strategy.value, "q": args.q, "gamma": args.gamma,
           "expected_l": b.expected_l, "expected_z": b.expected_z,
           "apparent_hashrate": b.apparent_hashrate}, args.format, out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    if args.cycles < 1:
        raise DomainError("--cycles must be at least 1")
    if args.workers < 1:
        raise DomainError("--workers must be at least 1")
    report = simulator.run_simulation(args.strategy, MinerParams(args.q, args.gamma), args.cycles,
                                      seed, args.mode, workers=args.workers)
    _emit(report.to_dict(), args.format, out)
    return EXIT_OK


def cmd_dist(args, out) -> int:
    if not 1 <= args.n_max <= DIST_MAX:
        raise DomainError(f"--n-max must lie in [1, {DIST_MAX}]")
    params = MinerParams(args.q, args.gamma)
    law = CycleLaw(args.strategy, params)
    rows = []
    for n in range(1, args.n_max + 1):
        closed = float(analytics.cycle_length_pmf(law, n))
        try:
            exact = float(oracle.exact_pmf(args.strategy, params, n))
        except RangeError:
            exact = None
        rows.append({"n": n, "closed_form": closed, "oracle": exact,
                     "difference": None if exact is None else closed - exact})
    _emit_table(rows, {"strategy": args.strategy.value, "q": args.q, "gamma": args.gamma},
                args.format, out)
    return EXIT_OK


def cmd_threshold(args, out) -> int:
    try:
        value = analytics.profitability_threshold(args.strategy, args.gamma, args.tol)
    except NumericError as exc:
        print(f"withholding: {exc}", file=sys.stderr)
        value = None
    _emit({"strategy": args.strategy.value, "gamma": args.gamma, "threshold": value},
          args.format, out)
    return EXIT_OK


def cmd_regionmap(args, out) -> int:
    rmap = regions.compute_region_map(args.q_steps, args.gamma_steps, args.q_max)
    regions.write_region_csv(rmap, args.csv_path)
    regions.write_region_image(rmap, args.ppm_path)
    counts = {s.label: int((rmap.dominant == i).sum()) for i, s in enumerate(regions.ORDER)}
    _emit({"csv": args.csv_path, "ppm": args.ppm_path, "q_steps": args.q_steps,
           "gamma_steps": args.gamma_steps, "q_max": args.q_max, **counts}, args.format, out)
    return EXIT_OK


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "dist": cmd_dist,
    "threshold": cmd_threshold,
    "regionmap": cmd_regionmap,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (DomainError, RangeError) as exc:
        print(f"withholding: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"withholding: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
